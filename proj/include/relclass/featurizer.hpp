#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "relclass/corpus.hpp"
#include "relclass/resources.hpp"

namespace relclass {

// Dense, insertion-ordered string -> id index.
class StringIndex {
 public:
  std::size_t add(std::string_view s) {
    auto it = ids_.find(std::string(s));
    if (it != ids_.end()) return it->second;
    std::size_t id = by_id_.size();
    by_id_.emplace_back(s);
    ids_.emplace(by_id_.back(), id);
    return id;
  }

  std::optional<std::size_t> id_of(std::string_view s) const {
    auto it = ids_.find(std::string(s));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& at(std::size_t id) const { return by_id_.at(id); }
  std::size_t size() const { return by_id_.size(); }
  const std::vector<std::string>& items() const { return by_id_; }

 private:
  std::vector<std::string> by_id_;
  std::unordered_map<std::string, std::size_t> ids_;
};

enum class Family : int { Word = 0, Shape = 1, Cluster = 2, Embedding = 3, Ctx1 = 4, Ctx2 = 5 };

inline constexpr std::array<Family, 6> kAllFamilies = {Family::Word,      Family::Shape,
                                                       Family::Cluster,   Family::Embedding,
                                                       Family::Ctx1,      Family::Ctx2};

struct FamilySet {
  bool word = true;
  bool shape = true;
  bool cluster = true;
  bool embedding = true;
  bool ctx1 = true;
  bool ctx2 = true;

  bool has(Family f) const {
    switch (f) {
      case Family::Word: return word;
      case Family::Shape: return shape;
      case Family::Cluster: return cluster;
      case Family::Embedding: return embedding;
      case Family::Ctx1: return ctx1;
      case Family::Ctx2: return ctx2;
    }
    return false;
  }
  bool any() const { return word || shape || cluster || embedding || ctx1 || ctx2; }
  bool operator==(const FamilySet&) const = default;

  static FamilySet all() { return {}; }
  // The configuration that won the competition: everything but shape.
  static FamilySet all_minus_shape() {
    FamilySet f;
    f.shape = false;
    return f;
  }
  static FamilySet all_minus_ctx2() {
    FamilySet f;
    f.ctx2 = false;
    return f;
  }
  static FamilySet none() { return {false, false, false, false, false, false}; }
};

std::string family_set_to_string(const FamilySet& f);
FamilySet family_set_from_string(std::string_view s);
const char* family_name(Family f);

// Character-level shape flags of one token.
struct ShapeFlags {
  bool has_uppercase = false;
  bool has_comma = false;
  bool initial_cap_and_first = false;
  bool first_lower = false;
  bool has_underscore = false;
  bool has_quote = false;

  bool operator==(const ShapeFlags&) const = default;
};
inline constexpr int kShapeFlagCount = 6;

ShapeFlags shape_signature(std::string_view token, bool is_first);

// The padding marker filling unused slots.
const std::string& pad_token();

// The frozen feature index space. Layout is slot-major: for each of the k+2
// slots, the enabled per-token blocks in order
//   [word one-hot |vocab|+1][shape 6][cluster one-hot num_clusters+1][embedding d]
// followed by the relation-level context blocks
//   [ctx1 one-hot |ctx_vocab|+1][ctx2 one-hot |ctx_vocab|+1].
// The trailing id of every one-hot block is reserved (PAD / unknown / none).
class FeatureSpace {
 public:
  StringIndex vocab;
  StringIndex ctx_vocab;
  StringIndex labels;
  std::size_t k = 0;
  FamilySet families;
  std::size_t embed_dim = 0;
  std::size_t num_clusters = 0;

  std::size_t slot_count() const { return k + 2; }

  std::size_t word_block() const { return families.word ? vocab.size() + 1 : 0; }
  std::size_t shape_block() const { return families.shape ? kShapeFlagCount : 0; }
  std::size_t cluster_block() const { return families.cluster ? num_clusters + 1 : 0; }
  std::size_t embed_block() const { return families.embedding ? embed_dim : 0; }
  std::size_t per_slot() const {
    return word_block() + shape_block() + cluster_block() + embed_block();
  }
  std::size_t ctx_block() const { return ctx_vocab.size() + 1; }

  std::size_t slot_offset(std::size_t s) const { return s * per_slot(); }
  std::size_t word_offset(std::size_t s) const { return slot_offset(s); }
  std::size_t shape_offset(std::size_t s) const { return slot_offset(s) + word_block(); }
  std::size_t cluster_offset(std::size_t s) const {
    return shape_offset(s) + shape_block();
  }
  std::size_t embed_offset(std::size_t s) const {
    return cluster_offset(s) + cluster_block();
  }
  std::size_t ctx1_offset() const { return slot_count() * per_slot(); }
  std::size_t ctx2_offset() const { return ctx1_offset() + (families.ctx1 ? ctx_block() : 0); }

  std::size_t total_dim() const {
    return ctx2_offset() + (families.ctx2 ? ctx_block() : 0);
  }

  std::size_t pad_word_id() const { return vocab.size(); }
  std::size_t oov_cluster_id() const { return num_clusters; }
  std::size_t none_ctx_id() const { return ctx_vocab.size(); }
};

// One dense embedding segment written at a global offset.
struct DenseSegment {
  std::size_t offset = 0;
  std::vector<double> values;
};

// Hybrid feature vector: sorted binary indices plus dense embedding segments,
// all addressed in the space's single global index space. All-zero segments
// are omitted (they contribute nothing to dot products or norms).
struct FeatureVector {
  std::vector<std::uint32_t> indices;
  std::vector<DenseSegment> dense;
  std::optional<std::size_t> label;

  double norm_sq() const {
    double v = static_cast<double>(indices.size());
    for (const auto& seg : dense)
      for (double x : seg.values) v += x * x;
    return v;
  }
};

// Freezes the index space over train (plus, in transductive mode, extra)
// instances. Labels come from train only; vocabulary, context vocabulary and
// k cover both.
FeatureSpace build_feature_space(const std::vector<RelationInstance>& train,
                                 const std::vector<RelationInstance>& extra,
                                 FamilySet families, std::size_t embed_dim,
                                 std::size_t num_clusters);

// Lays the mention out over exactly k+2 slots: slot 0 = entity-1 token,
// slot k+1 = entity-2 token, inner tokens right-aligned against entity 2 and
// padding filling the gap after entity 1. Mentions with more than k inner
// tokens keep the first ceil(k/2) and last floor(k/2) of them; *truncated is
// set when that happens.
std::vector<std::string> slot_tokens(const RelationInstance& inst, std::size_t k,
                                     bool* truncated = nullptr);

// The relation-level context words: none with an empty interior, the single
// interior word shared by both sides, otherwise (first inner, last inner).
// Computed on the instance tokens, never on padding.
std::pair<std::optional<std::string>, std::optional<std::string>> context_words(
    const RelationInstance& inst);

enum class VectorizeMode { Train, Predict };

struct VectorizeStats {
  std::size_t truncated = 0;
};

// Converts one instance into its feature vector under a frozen space.
// Resources may be null when the corresponding family is disabled.
FeatureVector vectorize(const RelationInstance& inst, const FeatureSpace& space,
                        const EmbeddingTable* embeddings, const ClusterMap* clusters,
                        VectorizeMode mode, VectorizeStats* stats = nullptr);

std::vector<FeatureVector> vectorize_all(const std::vector<RelationInstance>& insts,
                                         const FeatureSpace& space,
                                         const EmbeddingTable* embeddings,
                                         const ClusterMap* clusters, VectorizeMode mode,
                                         VectorizeStats* stats = nullptr);

// Where a global index lands: slot is meaningless for ctx families.
struct DecodedIndex {
  std::size_t slot = 0;
  Family family = Family::Word;
  std::size_t within = 0;

  bool operator==(const DecodedIndex&) const = default;
};

DecodedIndex decode_index(const FeatureSpace& space, std::size_t index);

// Classic sparse text line "label idx:val idx:val ..." with 1-based indices,
// for cross-checking against external linear-classifier tools.
void dump_svmlight(const FeatureVector& fv, std::ostream& out);

}  // namespace relclass
