#include "relclass/resources.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <istream>
#include <string>

namespace relclass {

namespace {

std::string_view rstrip(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

// Splits on runs of spaces/tabs.
std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t b = 0;
  while (b < s.size()) {
    while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
    std::size_t e = b;
    while (e < s.size() && s[e] != ' ' && s[e] != '\t') ++e;
    if (e > b) out.push_back(s.substr(b, e - b));
    b = e;
  }
  return out;
}

double parse_double(std::string_view s, std::size_t lineno) {
  // std::from_chars<double> is incomplete in some libstdc++ versions; strtod
  // on a bounded copy is portable and fast enough here.
  char buf[64];
  if (s.empty() || s.size() >= sizeof(buf))
    throw ParseError("non-numeric component \"" + std::string(s) + "\"", lineno);
  std::memcpy(buf, s.data(), s.size());
  buf[s.size()] = '\0';
  char* end = nullptr;
  double v = std::strtod(buf, &end);
  if (end != buf + s.size())
    throw ParseError("non-numeric component \"" + std::string(s) + "\"", lineno);
  return v;
}

}  // namespace

void EmbeddingTable::insert(std::string token, std::vector<double> vec) {
  entries_[std::move(token)] = std::move(vec);
}

const std::vector<double>& EmbeddingTable::lookup(std::string_view token) const {
  auto it = entries_.find(std::string(token));
  return it == entries_.end() ? zeros_ : it->second;
}

void ClusterMap::insert(std::string token, std::size_t id) {
  if (id >= num_classes_) num_classes_ = id + 1;
  entries_[std::move(token)] = id;
}

std::optional<std::size_t> ClusterMap::lookup(std::string_view token) const {
  auto it = entries_.find(std::string(token));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

EmbeddingTable load_embeddings(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty embedding file");
  ++lineno;
  auto header = split_ws(rstrip(line));
  if (header.size() != 2)
    throw ParseError("expected \"N d\" header", lineno);
  std::size_t count = 0, dim = 0;
  auto r1 = std::from_chars(header[0].data(), header[0].data() + header[0].size(), count);
  auto r2 = std::from_chars(header[1].data(), header[1].data() + header[1].size(), dim);
  if (r1.ec != std::errc{} || r2.ec != std::errc{} || dim == 0)
    throw ParseError("expected \"N d\" header", lineno);

  EmbeddingTable table(dim);
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = split_ws(rstrip(line));
    if (fields.empty()) continue;
    if (fields.size() != dim + 1)
      throw ParseError("expected " + std::to_string(dim) + " components, got " +
                           std::to_string(fields.size() - 1),
                       lineno);
    std::vector<double> vec;
    vec.reserve(dim);
    for (std::size_t i = 1; i < fields.size(); ++i) vec.push_back(parse_double(fields[i], lineno));
    table.insert(std::string(fields[0]), std::move(vec));
  }
  (void)count;  // the header count is advisory; the lines present win
  return table;
}

ClusterMap load_clusters(std::istream& in, std::optional<std::size_t> expected_classes) {
  ClusterMap map(expected_classes.value_or(0));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = rstrip(line);
    if (s.empty()) continue;
    auto tab = s.find('\t');
    if (tab == std::string_view::npos)
      throw ParseError("expected \"token<TAB>id\"", lineno);
    std::string_view tok = s.substr(0, tab);
    std::string_view id_str = s.substr(tab + 1);
    while (!id_str.empty() && (id_str.front() == ' ' || id_str.front() == '\t'))
      id_str.remove_prefix(1);
    std::size_t id = 0;
    auto r = std::from_chars(id_str.data(), id_str.data() + id_str.size(), id);
    if (r.ec != std::errc{} || r.ptr != id_str.data() + id_str.size())
      throw ParseError("non-integer cluster id \"" + std::string(id_str) + "\"", lineno);
    if (expected_classes && id >= *expected_classes)
      throw ParseError("cluster id " + std::to_string(id) + " out of range [0, " +
                           std::to_string(*expected_classes) + ")",
                       lineno);
    map.insert(std::string(tok), id);
  }
  return map;
}

}  // namespace relclass
