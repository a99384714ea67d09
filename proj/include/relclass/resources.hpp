#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "relclass/errors.hpp"

namespace relclass {

// Word vectors in word2vec text format. Immutable after load; lookups are
// total (out-of-vocabulary tokens resolve to all-zeros).
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim), zeros_(dim, 0.0) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }

  void insert(std::string token, std::vector<double> vec);

  // Stored vector, or the all-zeros vector for unknown tokens and padding.
  const std::vector<double>& lookup(std::string_view token) const;

  bool contains(std::string_view token) const {
    return entries_.find(std::string(token)) != entries_.end();
  }

 private:
  std::size_t dim_ = 0;
  std::vector<double> zeros_;
  std::unordered_map<std::string, std::vector<double>> entries_;
};

// token -> cluster id in [0, num_classes). Lookup is total via an optional.
class ClusterMap {
 public:
  ClusterMap() = default;
  explicit ClusterMap(std::size_t num_classes) : num_classes_(num_classes) {}

  std::size_t num_classes() const { return num_classes_; }
  std::size_t size() const { return entries_.size(); }

  void insert(std::string token, std::size_t id);
  std::optional<std::size_t> lookup(std::string_view token) const;

 private:
  std::size_t num_classes_ = 0;
  std::unordered_map<std::string, std::size_t> entries_;
};

// word2vec text format: a "N d" header line, then N lines "token v1 ... vd".
// Later duplicates overwrite earlier ones.
EmbeddingTable load_embeddings(std::istream& in);

// Tab-separated "token<TAB>cluster_id" lines. When expected_classes is unset,
// num_classes becomes 1 + max id seen (0 for an empty file); otherwise ids
// are range-checked against it.
ClusterMap load_clusters(std::istream& in,
                         std::optional<std::size_t> expected_classes = std::nullopt);

}  // namespace relclass
