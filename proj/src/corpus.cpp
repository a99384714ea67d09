#include "relclass/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <iterator>
#include <sstream>
#include <unordered_set>

#include "text_util.hpp"

namespace relclass {

namespace {

std::string decode_xml_escapes(std::string_view s) {
  if (s.find('&') == std::string_view::npos) return std::string(s);
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    static constexpr std::pair<std::string_view, char> kEscapes[] = {
        {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}};
    bool matched = false;
    for (const auto& [pat, ch] : kEscapes) {
      if (s.substr(i, pat.size()) == pat) {
        out.push_back(ch);
        i += pat.size();
        matched = true;
        break;
      }
    }
    if (!matched) out.push_back(s[i++]);
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string read_all(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Extracts the value of id="..." from a tag body like `entity id="E89-1006.1"`.
std::optional<std::string> tag_id_attr(std::string_view body) {
  auto at = body.find("id=");
  if (at == std::string_view::npos) return std::nullopt;
  at += 3;
  if (at >= body.size()) return std::nullopt;
  char q = body[at];
  if (q != '"' && q != '\'') return std::nullopt;
  auto end = body.find(q, at + 1);
  if (end == std::string_view::npos) return std::nullopt;
  return std::string(body.substr(at + 1, end - at - 1));
}

struct DocBuilder {
  AbstractDoc doc;
  std::unordered_set<std::string> seen_ids;
  bool explicit_id = false;
  bool has_content = false;

  void add_plain(std::string text) {
    if (text.empty()) return;
    if (trim(text).size() > 0) has_content = true;
    if (!doc.segments.empty() && doc.segments.back().kind == Segment::Kind::Plain) {
      doc.segments.back().surface += text;
    } else {
      doc.segments.push_back({Segment::Kind::Plain, "", std::move(text)});
    }
  }

  void add_entity(const std::string& id, std::string surface, std::size_t line) {
    if (!seen_ids.insert(id).second)
      throw ParseError("duplicate entity id \"" + id + "\"", line);
    has_content = true;
    doc.segments.push_back({Segment::Kind::Entity, id, std::move(surface)});
  }
};

void finalize_doc(DocBuilder& b, std::vector<AbstractDoc>& out, std::size_t line) {
  if (!b.has_content) return;
  if (!b.explicit_id) {
    // Infer the document id from the first entity id.
    for (const auto& seg : b.doc.segments) {
      if (seg.kind == Segment::Kind::Entity) {
        b.doc.id = abstract_prefix(seg.id);
        break;
      }
    }
    if (b.doc.id.empty()) return;  // plain structure with no entities: drop
  }
  for (const auto& seg : b.doc.segments) {
    if (seg.kind == Segment::Kind::Entity && abstract_prefix(seg.id) != b.doc.id)
      throw ParseError("entity id \"" + seg.id + "\" does not match abstract id \"" +
                           b.doc.id + "\"",
                       line);
  }
  out.push_back(std::move(b.doc));
}

}  // namespace

std::string abstract_prefix(const std::string& entity_id) {
  auto dot = entity_id.rfind('.');
  if (dot == std::string::npos) return "";
  return entity_id.substr(0, dot);
}

std::string entity_token(const std::string& surface) {
  std::string out;
  out.reserve(surface.size());
  bool in_space = false;
  for (char c : trim(surface)) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
    } else {
      if (in_space && !out.empty()) out.push_back('_');
      in_space = false;
      out.push_back(c);
    }
  }
  return out;
}

std::vector<AbstractDoc> parse_abstracts(std::istream& in) {
  const std::string text = read_all(in);
  std::vector<AbstractDoc> out;
  DocBuilder cur;

  std::size_t line = 1;
  std::size_t plain_start = 0;
  bool in_entity = false;
  std::string entity_id;
  std::size_t entity_open_line = 0;
  std::string entity_surface;

  auto flush_plain = [&](std::size_t end) {
    if (end > plain_start) {
      std::string chunk = decode_xml_escapes(std::string_view(text).substr(plain_start, end - plain_start));
      if (in_entity)
        entity_surface += chunk;
      else
        cur.add_plain(std::move(chunk));
    }
  };

  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') ++line;
    if (c != '<') {
      ++i;
      continue;
    }
    // A '<' not opening a tag-like sequence is ordinary text.
    if (i + 1 >= text.size() ||
        !(std::isalpha(static_cast<unsigned char>(text[i + 1])) || text[i + 1] == '/' ||
          text[i + 1] == '?' || text[i + 1] == '!')) {
      ++i;
      continue;
    }
    std::size_t close = text.find('>', i);
    std::size_t tag_line = line;
    if (close == std::string::npos) {
      std::string_view body(text.data() + i, std::min<std::size_t>(text.size() - i, 24));
      throw ParseError("unclosed tag \"" + std::string(body) + "...\"", tag_line);
    }
    flush_plain(i);
    std::string_view body(text.data() + i + 1, close - i - 1);
    line += static_cast<std::size_t>(std::count(text.begin() + i, text.begin() + close, '\n'));

    auto tag_name = body.substr(0, body.find_first_of(" \t\r\n"));
    if (tag_name == "entity") {
      auto id = tag_id_attr(body);
      if (!id || id->empty()) throw ParseError("entity tag without id attribute", tag_line);
      if (in_entity) throw ParseError("nested entity tag \"" + *id + "\"", tag_line);
      in_entity = true;
      entity_id = *id;
      entity_open_line = tag_line;
      entity_surface.clear();
    } else if (tag_name == "/entity") {
      if (!in_entity) throw ParseError("</entity> without opening tag", tag_line);
      if (trim(entity_surface).empty())
        throw ParseError("entity \"" + entity_id + "\" has empty surface", tag_line);
      cur.add_entity(entity_id, entity_surface, tag_line);
      in_entity = false;
    } else if (tag_name == "text") {
      if (in_entity) throw ParseError("unclosed entity tag \"" + entity_id + "\"", entity_open_line);
      finalize_doc(cur, out, tag_line);
      cur = DocBuilder{};
      if (auto id = tag_id_attr(body); id && !id->empty()) {
        cur.doc.id = *id;
        cur.explicit_id = true;
      }
    } else if (tag_name == "/text") {
      if (in_entity) throw ParseError("unclosed entity tag \"" + entity_id + "\"", entity_open_line);
      finalize_doc(cur, out, tag_line);
      cur = DocBuilder{};
    } else {
      // <doc>, <abstract>, <title>, <?xml ...?> etc.: transparent structure.
      // Separate surrounding text so titles do not glue onto abstracts.
      if (!in_entity) cur.add_plain(" ");
    }
    i = close + 1;
    plain_start = i;
  }
  if (in_entity)
    throw ParseError("unclosed entity tag \"" + entity_id + "\"", entity_open_line);
  flush_plain(text.size());
  finalize_doc(cur, out, line);
  return out;
}

std::vector<RelationLabel> parse_relations(std::istream& in) {
  std::vector<RelationLabel> out;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string stripped = trim(raw);
    if (stripped.empty() || stripped[0] == '#') continue;

    auto open = stripped.find('(');
    if (open == std::string::npos || stripped.back() != ')')
      throw ParseError("malformed relation line \"" + stripped + "\"", lineno);
    RelationLabel rel;
    rel.rel_type = trim(stripped.substr(0, open));
    if (rel.rel_type.empty())
      throw ParseError("relation line missing type", lineno);
    std::string inner = stripped.substr(open + 1, stripped.size() - open - 2);
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      auto comma = inner.find(',', start);
      parts.push_back(trim(inner.substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (parts.size() < 2 || parts.size() > 3 || parts[0].empty() || parts[1].empty())
      throw ParseError("malformed relation line \"" + stripped + "\"", lineno);
    rel.e1 = parts[0];
    rel.e2 = parts[1];
    if (parts.size() == 3) {
      if (parts[2] != "REVERSE")
        throw ParseError("unexpected token \"" + parts[2] + "\" in relation line", lineno);
      rel.reversed = true;
    }
    if (abstract_prefix(rel.e1) != abstract_prefix(rel.e2) || abstract_prefix(rel.e1).empty())
      throw ParseError("entity ids \"" + rel.e1 + "\" and \"" + rel.e2 +
                           "\" refer to different abstracts",
                       lineno);
    out.push_back(std::move(rel));
  }
  return out;
}

std::vector<EntityPair> parse_entity_pairs(std::istream& in) {
  std::vector<EntityPair> out;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string stripped = trim(raw);
    if (stripped.empty() || stripped[0] == '#') continue;
    if (stripped.find('(') != std::string::npos) {
      std::istringstream one(stripped);
      auto rels = parse_relations(one);
      if (rels.size() != 1) throw ParseError("malformed pair line", lineno);
      out.push_back({rels[0].e1, rels[0].e2});
      continue;
    }
    auto comma = stripped.find(',');
    if (comma == std::string::npos)
      throw ParseError("malformed pair line \"" + stripped + "\"", lineno);
    EntityPair p{trim(stripped.substr(0, comma)), trim(stripped.substr(comma + 1))};
    if (p.e1.empty() || p.e2.empty())
      throw ParseError("malformed pair line \"" + stripped + "\"", lineno);
    if (abstract_prefix(p.e1) != abstract_prefix(p.e2) || abstract_prefix(p.e1).empty())
      throw ParseError("entity ids \"" + p.e1 + "\" and \"" + p.e2 +
                           "\" refer to different abstracts",
                       lineno);
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

// Sentence boundary heuristic: a token ending in '.', '!' or '?' followed by
// a token starting with an ASCII capital closes a sentence. The length field
// this feeds is carried in the representation but consumed by no feature.
std::vector<std::size_t> sentence_lengths(const std::vector<std::string>& tokens) {
  std::vector<std::size_t> lens(tokens.size(), 0);
  std::size_t start = 0;
  auto close = [&](std::size_t end) {  // [start, end] inclusive
    std::size_t n = end - start + 1;
    for (std::size_t i = start; i <= end; ++i) lens[i] = n;
    start = end + 1;
  };
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    char last = tokens[i].empty() ? '\0' : tokens[i].back();
    if ((last == '.' || last == '!' || last == '?') && !tokens[i + 1].empty() &&
        text::is_ascii_upper(static_cast<unsigned char>(tokens[i + 1][0]))) {
      close(i);
    }
  }
  if (start < tokens.size()) close(tokens.size() - 1);
  return lens;
}

}  // namespace

NormalizedDoc normalize_tokens(const AbstractDoc& doc) {
  NormalizedDoc out;
  // Entity-token output positions must stay stable once recorded, so merging
  // only ever appends to the last token and never removes one before it.
  std::vector<bool> is_entity_tok;

  auto push_plain_word = [&](std::string_view word) {
    if (text::is_punct_only(word) && !out.tokens.empty() && !is_entity_tok.back()) {
      out.tokens.back() += std::string(word);
    } else {
      out.tokens.emplace_back(word);
      is_entity_tok.push_back(false);
    }
  };

  for (const auto& seg : doc.segments) {
    if (seg.kind == Segment::Kind::Entity) {
      std::string tok = entity_token(seg.surface);
      out.entity_pos.emplace(seg.id, out.tokens.size());
      out.tokens.push_back(std::move(tok));
      is_entity_tok.push_back(true);
    } else {
      std::string_view s = seg.surface;
      std::size_t b = 0;
      while (b < s.size()) {
        while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        std::size_t e = b;
        while (e < s.size() && !std::isspace(static_cast<unsigned char>(s[e]))) ++e;
        if (e > b) push_plain_word(s.substr(b, e - b));
        b = e;
      }
    }
  }
  out.sentence_len_at = sentence_lengths(out.tokens);
  return out;
}

namespace {

RelationInstance make_instance(const std::vector<AbstractDoc>& docs,
                               const std::vector<NormalizedDoc>& normed,
                               const std::unordered_map<std::string, std::size_t>& doc_of_entity,
                               const std::string& e1, const std::string& e2,
                               std::optional<std::string> label) {
  auto d1 = doc_of_entity.find(e1);
  if (d1 == doc_of_entity.end()) throw DataError("unknown entity id \"" + e1 + "\"");
  auto d2 = doc_of_entity.find(e2);
  if (d2 == doc_of_entity.end()) throw DataError("unknown entity id \"" + e2 + "\"");
  if (d1->second != d2->second)
    throw DataError("entities \"" + e1 + "\" and \"" + e2 + "\" are in different abstracts");

  const NormalizedDoc& nd = normed[d1->second];
  std::size_t p1 = nd.entity_pos.at(e1);
  std::size_t p2 = nd.entity_pos.at(e2);
  if (p2 <= p1)
    throw DataError("entity \"" + e2 + "\" does not follow \"" + e1 +
                     "\" in text; direction is encoded by REVERSE, not token order");

  RelationInstance inst;
  inst.abstract_id = docs[d1->second].id;
  inst.tokens.assign(nd.tokens.begin() + static_cast<std::ptrdiff_t>(p1),
                     nd.tokens.begin() + static_cast<std::ptrdiff_t>(p2) + 1);
  inst.e1_id = e1;
  inst.e2_id = e2;
  inst.label = std::move(label);
  inst.sentence_len = nd.sentence_len_at[p1];
  return inst;
}

struct EntityIndex {
  std::vector<NormalizedDoc> normed;
  std::unordered_map<std::string, std::size_t> doc_of_entity;
};

EntityIndex index_docs(const std::vector<AbstractDoc>& docs) {
  EntityIndex ix;
  ix.normed.reserve(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    ix.normed.push_back(normalize_tokens(docs[d]));
    for (const auto& [id, pos] : ix.normed.back().entity_pos) ix.doc_of_entity.emplace(id, d);
  }
  return ix;
}

}  // namespace

std::vector<RelationInstance> extract_instances(const std::vector<AbstractDoc>& docs,
                                                const std::vector<RelationLabel>& labels) {
  EntityIndex ix = index_docs(docs);
  std::vector<RelationInstance> out;
  out.reserve(labels.size());
  for (const auto& rel : labels) {
    std::string label = rel.rel_type + (rel.reversed ? " REVERSE" : "");
    out.push_back(make_instance(docs, ix.normed, ix.doc_of_entity, rel.e1, rel.e2, label));
  }
  return out;
}

std::vector<RelationInstance> extract_instances(const std::vector<AbstractDoc>& docs,
                                                const std::vector<EntityPair>& pairs) {
  EntityIndex ix = index_docs(docs);
  std::vector<RelationInstance> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs)
    out.push_back(make_instance(docs, ix.normed, ix.doc_of_entity, p.e1, p.e2, std::nullopt));
  return out;
}

}  // namespace relclass
