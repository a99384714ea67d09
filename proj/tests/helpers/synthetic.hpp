#pragma once

// Deterministic synthetic corpora for end-to-end and performance tests.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "relclass/corpus.hpp"
#include "relclass/featurizer.hpp"
#include "relclass/resources.hpp"

namespace relclass::testing {

struct SyntheticData {
  std::vector<RelationInstance> instances;
  EmbeddingTable embeddings;
  ClusterMap clusters;
};

// A corpus whose label is a deterministic function of the ctx1 word (the
// word right after entity one). Everything else is built to carry as little
// label signal as possible: interior words are drawn from the same pool the
// ctx1 word comes from, entity tokens are label-independent, all tokens are
// lowercase (constant shape), every word shares one cluster and one constant
// embedding vector.
inline SyntheticData make_ctx_determined_corpus(std::size_t n, std::uint64_t seed,
                                                std::size_t num_labels = 6,
                                                std::size_t num_ctx_words = 24,
                                                std::size_t max_inner = 24) {
  std::mt19937_64 rng(seed);
  if (max_inner > num_ctx_words) max_inner = num_ctx_words;  // draws are distinct
  std::vector<std::string> pool;
  for (std::size_t i = 0; i < num_ctx_words; ++i) pool.push_back("word" + std::to_string(i));
  std::vector<std::string> entities;
  for (std::size_t i = 0; i < 8; ++i) entities.push_back("thing" + std::to_string(i));

  SyntheticData data;
  data.embeddings = EmbeddingTable(8);
  data.clusters = ClusterMap(4);
  const std::vector<double> flat(8, 0.05);
  for (const auto& w : pool) {
    data.embeddings.insert(w, flat);
    data.clusters.insert(w, 0);
  }
  for (const auto& e : entities) {
    data.embeddings.insert(e, flat);
    data.clusters.insert(e, 0);
  }

  std::vector<std::size_t> others;
  others.reserve(pool.size());

  data.instances.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Long interiors with a geometric tail, filled without replacement. The
    // constant hazard means the slot a word lands in says almost nothing
    // about whether it is the first interior word, and drawing each word at
    // most once leaves no usable count signal, so slot-word features cannot
    // stand in for the context feature.
    std::size_t len = 8;
    while (len < max_inner && rng() % 5 != 0) ++len;
    std::size_t first = rng() % pool.size();

    others.clear();
    for (std::size_t w = 0; w < pool.size(); ++w)
      if (w != first) others.push_back(w);
    for (std::size_t j = 0; j + 1 < len; ++j)  // partial shuffle: len-1 distinct picks
      std::swap(others[j], others[j + rng() % (others.size() - j)]);

    RelationInstance inst;
    inst.abstract_id = "S" + std::to_string(i);
    inst.e1_id = inst.abstract_id + ".1";
    inst.e2_id = inst.abstract_id + ".2";
    inst.tokens.push_back(entities[rng() % entities.size()]);
    inst.tokens.push_back(pool[first]);
    for (std::size_t j = 0; j + 1 < len; ++j) inst.tokens.push_back(pool[others[j]]);
    inst.tokens.push_back(entities[rng() % entities.size()]);
    inst.label = "L" + std::to_string(first % num_labels);
    inst.sentence_len = inst.tokens.size();
    data.instances.push_back(std::move(inst));
  }
  return data;
}

// A corpus sized like the full competition data: |V| words, d-dimensional
// random embeddings, many clusters. Labels are random; only throughput
// matters here.
inline SyntheticData make_speed_corpus(std::size_t n = 1583, std::uint64_t seed = 7,
                                       std::size_t vocab_size = 5000,
                                       std::size_t embed_dim = 300,
                                       std::size_t num_clusters = 1000,
                                       std::size_t num_labels = 6,
                                       std::size_t max_inner = 10) {
  std::mt19937_64 rng(seed);
  auto word = [](std::size_t i) { return "w" + std::to_string(i); };

  SyntheticData data;
  data.embeddings = EmbeddingTable(embed_dim);
  data.clusters = ClusterMap(num_clusters);
  std::vector<double> vec(embed_dim);
  for (std::size_t i = 0; i < vocab_size; ++i) {
    for (auto& v : vec) v = (static_cast<double>(rng() % 2000) - 1000.0) / 10000.0;
    data.embeddings.insert(word(i), vec);
    data.clusters.insert(word(i), i % num_clusters);
  }

  data.instances.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t len = rng() % (max_inner + 1);
    RelationInstance inst;
    inst.abstract_id = "D" + std::to_string(i);
    inst.e1_id = inst.abstract_id + ".1";
    inst.e2_id = inst.abstract_id + ".2";
    inst.tokens.push_back(word(rng() % vocab_size));
    for (std::size_t j = 0; j < len; ++j) inst.tokens.push_back(word(rng() % vocab_size));
    inst.tokens.push_back(word(rng() % vocab_size));
    inst.label = "L" + std::to_string(rng() % num_labels);
    inst.sentence_len = inst.tokens.size();
    data.instances.push_back(std::move(inst));
  }
  return data;
}

// Wraps one dense row as a feature vector (a single dense segment at
// offset 0) so the sparse solver can run on dense benchmark problems.
inline FeatureVector dense_row_vector(const std::vector<double>& row) {
  FeatureVector fv;
  fv.dense.push_back({0, row});
  return fv;
}

}  // namespace relclass::testing
