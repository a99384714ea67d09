#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "relclass/classifier.hpp"
#include "relclass/featurizer.hpp"

namespace relclass {

struct LabelScore {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // gold occurrences
};

// Which labels enter the macro average.
enum class MacroAveraging {
  GoldLabels,        // labels occurring in gold (default)
  GoldOrPredLabels,  // union of gold and predicted labels
};

struct EvaluationReport {
  std::vector<LabelScore> per_label;        // one row per label in the universe
  std::vector<std::string> label_universe;  // row/column order of the confusion matrix
  std::vector<std::vector<std::size_t>> confusion;  // [gold][pred]
  double macro_f1 = 0.0;
  double micro_accuracy = 0.0;
};

// Scores full label strings (type and direction must both match).
EvaluationReport score(const std::vector<std::string>& gold,
                       const std::vector<std::string>& pred,
                       MacroAveraging averaging = MacroAveraging::GoldLabels);

// Seeded shuffle, then contiguous folds differing in size by at most one.
// Returns (train indices, heldout indices) per fold; partitions are disjoint
// and exhaustive.
std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> kfold_split(
    std::size_t n, std::size_t folds, std::uint64_t seed);

struct CvOptions {
  std::size_t folds = 5;
  std::uint64_t seed = 1;
  bool transductive = true;  // heldout tokens expand vocabulary and k per fold
};

struct CvResult {
  std::vector<EvaluationReport> fold_reports;
  double mean_macro_f1 = 0.0;
  std::size_t truncated_instances = 0;
};

// Per fold: build the feature space on the train portion (plus heldout
// tokens in transductive mode), train, predict the heldout fold, score.
CvResult cross_validate(const std::vector<RelationInstance>& instances,
                        const TrainConfig& train_config, FamilySet families,
                        const EmbeddingTable* embeddings, const ClusterMap* clusters,
                        const CvOptions& options);

// Human-readable aligned table.
void print_report(const EvaluationReport& report, std::ostream& out);
// One metric per line, "key = value" form, for scripting.
void print_report_kv(const EvaluationReport& report, std::ostream& out);

}  // namespace relclass
