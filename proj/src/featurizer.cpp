#include "relclass/featurizer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "text_util.hpp"

namespace relclass {

const std::string& pad_token() {
  static const std::string pad = "<PAD>";
  return pad;
}

const char* family_name(Family f) {
  switch (f) {
    case Family::Word: return "word";
    case Family::Shape: return "shape";
    case Family::Cluster: return "cluster";
    case Family::Embedding: return "embedding";
    case Family::Ctx1: return "ctx1";
    case Family::Ctx2: return "ctx2";
  }
  return "?";
}

std::string family_set_to_string(const FamilySet& f) {
  std::string out;
  for (Family fam : kAllFamilies) {
    if (!f.has(fam)) continue;
    if (!out.empty()) out += ',';
    out += family_name(fam);
  }
  return out.empty() ? "none" : out;
}

FamilySet family_set_from_string(std::string_view s) {
  FamilySet f = FamilySet::none();
  if (s == "none") return f;
  std::size_t b = 0;
  while (b <= s.size()) {
    auto comma = s.find(',', b);
    std::string_view name = s.substr(b, comma - b);
    if (name == "word") f.word = true;
    else if (name == "shape") f.shape = true;
    else if (name == "cluster") f.cluster = true;
    else if (name == "embedding") f.embedding = true;
    else if (name == "ctx1") f.ctx1 = true;
    else if (name == "ctx2") f.ctx2 = true;
    else throw DataError("unknown feature family \"" + std::string(name) + "\"");
    if (comma == std::string_view::npos) break;
    b = comma + 1;
  }
  return f;
}

ShapeFlags shape_signature(std::string_view token, bool is_first) {
  ShapeFlags flags;
  if (token.empty()) return flags;
  std::size_t pos = 0;
  bool first_cp = true;
  while (pos < token.size()) {
    char32_t cp = text::next_codepoint(token, pos);
    if (text::is_ascii_upper(cp)) {
      flags.has_uppercase = true;
      if (first_cp && is_first) flags.initial_cap_and_first = true;
    }
    if (first_cp && text::is_ascii_lower(cp)) flags.first_lower = true;
    if (cp == ',') flags.has_comma = true;
    if (cp == '_') flags.has_underscore = true;
    if (text::is_quote_cp(cp)) flags.has_quote = true;
    first_cp = false;
  }
  return flags;
}

FeatureSpace build_feature_space(const std::vector<RelationInstance>& train,
                                 const std::vector<RelationInstance>& extra,
                                 FamilySet families, std::size_t embed_dim,
                                 std::size_t num_clusters) {
  if (train.empty()) throw DataError("cannot build a feature space from an empty training set");
  FeatureSpace space;
  space.families = families;
  space.embed_dim = embed_dim;
  space.num_clusters = num_clusters;

  auto absorb = [&space](const std::vector<RelationInstance>& insts, bool with_labels) {
    for (const auto& inst : insts) {
      for (const auto& tok : inst.tokens) space.vocab.add(tok);
      auto [c1, c2] = context_words(inst);
      if (c1) space.ctx_vocab.add(*c1);
      if (c2) space.ctx_vocab.add(*c2);
      space.k = std::max(space.k, inst.inner_len());
      if (with_labels && inst.label) space.labels.add(*inst.label);
    }
  };
  absorb(train, true);
  absorb(extra, false);
  return space;
}

std::vector<std::string> slot_tokens(const RelationInstance& inst, std::size_t k,
                                     bool* truncated) {
  if (truncated) *truncated = false;
  std::vector<std::string> slots;
  slots.reserve(k + 2);
  slots.push_back(inst.tokens.front());

  std::size_t inner = inst.inner_len();
  auto first_inner = inst.tokens.begin() + 1;
  if (inner <= k) {
    slots.insert(slots.end(), k - inner, pad_token());
    slots.insert(slots.end(), first_inner, first_inner + static_cast<std::ptrdiff_t>(inner));
  } else {
    // Longer than anything seen at training time: keep the entity-adjacent
    // halves of the interior.
    if (truncated) *truncated = true;
    std::size_t head = (k + 1) / 2;
    std::size_t tail = k / 2;
    slots.insert(slots.end(), first_inner, first_inner + static_cast<std::ptrdiff_t>(head));
    slots.insert(slots.end(), first_inner + static_cast<std::ptrdiff_t>(inner - tail),
                 first_inner + static_cast<std::ptrdiff_t>(inner));
  }
  slots.push_back(inst.tokens.back());
  return slots;
}

std::pair<std::optional<std::string>, std::optional<std::string>> context_words(
    const RelationInstance& inst) {
  std::size_t inner = inst.inner_len();
  if (inner == 0) return {std::nullopt, std::nullopt};
  if (inner == 1) return {inst.tokens[1], inst.tokens[1]};
  return {inst.tokens[1], inst.tokens[inst.tokens.size() - 2]};
}

FeatureVector vectorize(const RelationInstance& inst, const FeatureSpace& space,
                        const EmbeddingTable* embeddings, const ClusterMap* clusters,
                        VectorizeMode mode, VectorizeStats* stats) {
  if (space.families.embedding && space.embed_dim > 0 &&
      (!embeddings || embeddings->dim() != space.embed_dim))
    throw DataError("embedding table missing or dimension does not match the feature space");
  if (space.families.cluster && (clusters ? clusters->num_classes() > space.num_clusters
                                          : space.num_clusters > 0))
    throw DataError("cluster map missing or class count does not match the feature space");

  FeatureVector fv;
  if (mode == VectorizeMode::Train) {
    if (!inst.label) throw DataError("training instance without a label");
    auto id = space.labels.id_of(*inst.label);
    if (!id) throw DataError("label \"" + *inst.label + "\" is not in the feature space");
    fv.label = *id;
  } else if (inst.label) {
    fv.label = space.labels.id_of(*inst.label);  // may stay empty
  }

  bool truncated = false;
  std::vector<std::string> slots = slot_tokens(inst, space.k, &truncated);
  if (truncated && stats) ++stats->truncated;

  // Emitting blocks in layout order keeps the index list strictly increasing.
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const std::string& tok = slots[s];
    const bool is_pad = (tok == pad_token());

    if (space.families.word) {
      std::size_t id = space.pad_word_id();
      if (!is_pad)
        if (auto known = space.vocab.id_of(tok)) id = *known;
      fv.indices.push_back(static_cast<std::uint32_t>(space.word_offset(s) + id));
    }
    if (space.families.shape && !is_pad) {
      ShapeFlags f = shape_signature(tok, s == 0);
      const bool bits[kShapeFlagCount] = {f.has_uppercase,  f.has_comma, f.initial_cap_and_first,
                                          f.first_lower,    f.has_underscore, f.has_quote};
      for (int b = 0; b < kShapeFlagCount; ++b)
        if (bits[b])
          fv.indices.push_back(
              static_cast<std::uint32_t>(space.shape_offset(s) + static_cast<std::size_t>(b)));
    }
    if (space.families.cluster) {
      std::size_t id = space.oov_cluster_id();
      if (!is_pad && clusters)
        if (auto c = clusters->lookup(tok)) id = *c;
      fv.indices.push_back(static_cast<std::uint32_t>(space.cluster_offset(s) + id));
    }
    if (space.families.embedding && !is_pad && embeddings) {
      const std::vector<double>& vec = embeddings->lookup(tok);
      bool nonzero = std::any_of(vec.begin(), vec.end(), [](double v) { return v != 0.0; });
      if (nonzero) fv.dense.push_back({space.embed_offset(s), vec});
    }
  }

  auto [c1, c2] = context_words(inst);
  auto ctx_id = [&space](const std::optional<std::string>& w) {
    if (!w) return space.none_ctx_id();
    if (auto id = space.ctx_vocab.id_of(*w)) return *id;
    return space.none_ctx_id();
  };
  if (space.families.ctx1)
    fv.indices.push_back(static_cast<std::uint32_t>(space.ctx1_offset() + ctx_id(c1)));
  if (space.families.ctx2)
    fv.indices.push_back(static_cast<std::uint32_t>(space.ctx2_offset() + ctx_id(c2)));

  return fv;
}

std::vector<FeatureVector> vectorize_all(const std::vector<RelationInstance>& insts,
                                         const FeatureSpace& space,
                                         const EmbeddingTable* embeddings,
                                         const ClusterMap* clusters, VectorizeMode mode,
                                         VectorizeStats* stats) {
  std::vector<FeatureVector> out;
  out.reserve(insts.size());
  for (const auto& inst : insts)
    out.push_back(vectorize(inst, space, embeddings, clusters, mode, stats));
  return out;
}

DecodedIndex decode_index(const FeatureSpace& space, std::size_t index) {
  if (index >= space.total_dim()) throw DataError("feature index out of range");
  std::size_t per = space.per_slot();
  std::size_t slot_region = space.slot_count() * per;
  if (per > 0 && index < slot_region) {
    DecodedIndex d;
    d.slot = index / per;
    std::size_t off = index % per;
    if (off < space.word_block()) return {d.slot, Family::Word, off};
    off -= space.word_block();
    if (off < space.shape_block()) return {d.slot, Family::Shape, off};
    off -= space.shape_block();
    if (off < space.cluster_block()) return {d.slot, Family::Cluster, off};
    off -= space.cluster_block();
    return {d.slot, Family::Embedding, off};
  }
  std::size_t off = index - space.ctx1_offset();
  if (space.families.ctx1 && off < space.ctx_block()) return {0, Family::Ctx1, off};
  return {0, Family::Ctx2, index - space.ctx2_offset()};
}

void dump_svmlight(const FeatureVector& fv, std::ostream& out) {
  out << (fv.label ? static_cast<long long>(*fv.label) : -1LL);
  std::size_t si = 0;
  auto flush_dense_before = [&](std::size_t limit) {
    for (; si < fv.dense.size() && fv.dense[si].offset < limit; ++si) {
      const auto& seg = fv.dense[si];
      for (std::size_t j = 0; j < seg.values.size(); ++j)
        if (seg.values[j] != 0.0) out << ' ' << seg.offset + j + 1 << ':' << seg.values[j];
    }
  };
  for (std::uint32_t idx : fv.indices) {
    flush_dense_before(idx);
    out << ' ' << idx + 1 << ":1";
  }
  flush_dense_before(static_cast<std::size_t>(-1));
  out << '\n';
}

}  // namespace relclass
