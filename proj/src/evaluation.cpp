#include "relclass/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>
#include <unordered_set>

namespace relclass {

EvaluationReport score(const std::vector<std::string>& gold,
                       const std::vector<std::string>& pred, MacroAveraging averaging) {
  if (gold.size() != pred.size())
    throw DataError("gold and prediction counts differ (" + std::to_string(gold.size()) +
                    " vs " + std::to_string(pred.size()) + ")");
  if (gold.empty()) throw DataError("nothing to score");

  EvaluationReport report;
  std::unordered_map<std::string, std::size_t> row;
  auto label_id = [&](const std::string& s) {
    auto it = row.find(s);
    if (it != row.end()) return it->second;
    std::size_t id = report.label_universe.size();
    row.emplace(s, id);
    report.label_universe.push_back(s);
    return id;
  };
  for (const auto& g : gold) label_id(g);
  std::unordered_set<std::string> gold_set(gold.begin(), gold.end());
  for (const auto& p : pred) label_id(p);

  const std::size_t n_labels = report.label_universe.size();
  report.confusion.assign(n_labels, std::vector<std::size_t>(n_labels, 0));
  for (std::size_t i = 0; i < gold.size(); ++i)
    ++report.confusion[row.at(gold[i])][row.at(pred[i])];

  std::size_t correct = 0;
  double f1_sum = 0.0;
  std::size_t f1_count = 0;
  for (std::size_t c = 0; c < n_labels; ++c) {
    std::size_t tp = report.confusion[c][c];
    std::size_t gold_count = 0, pred_count = 0;
    for (std::size_t j = 0; j < n_labels; ++j) {
      gold_count += report.confusion[c][j];
      pred_count += report.confusion[j][c];
    }
    correct += tp;

    LabelScore ls;
    ls.label = report.label_universe[c];
    ls.support = gold_count;
    ls.precision = pred_count ? static_cast<double>(tp) / static_cast<double>(pred_count) : 0.0;
    ls.recall = gold_count ? static_cast<double>(tp) / static_cast<double>(gold_count) : 0.0;
    ls.f1 = (ls.precision + ls.recall) > 0.0
                ? 2.0 * ls.precision * ls.recall / (ls.precision + ls.recall)
                : 0.0;
    report.per_label.push_back(ls);

    bool in_average = averaging == MacroAveraging::GoldOrPredLabels ||
                      gold_set.count(ls.label) > 0;
    if (in_average) {
      f1_sum += ls.f1;
      ++f1_count;
    }
  }
  report.macro_f1 = f1_count ? f1_sum / static_cast<double>(f1_count) : 0.0;
  report.micro_accuracy = static_cast<double>(correct) / static_cast<double>(gold.size());
  return report;
}

namespace {

void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[rng() % i]);
}

}  // namespace

std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> kfold_split(
    std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw DataError("need at least 2 folds");
  if (folds > n) throw DataError("more folds than instances");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  shuffle_indices(order, rng);

  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> out;
  out.reserve(folds);
  const std::size_t base = n / folds;
  const std::size_t rem = n % folds;
  std::size_t start = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    std::size_t size = base + (f < rem ? 1 : 0);
    std::vector<std::size_t> heldout(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(start + size));
    std::vector<std::size_t> train;
    train.reserve(n - size);
    train.insert(train.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(start));
    train.insert(train.end(), order.begin() + static_cast<std::ptrdiff_t>(start + size),
                 order.end());
    out.emplace_back(std::move(train), std::move(heldout));
    start += size;
  }
  return out;
}

CvResult cross_validate(const std::vector<RelationInstance>& instances,
                        const TrainConfig& train_config, FamilySet families,
                        const EmbeddingTable* embeddings, const ClusterMap* clusters,
                        const CvOptions& options) {
  for (const auto& inst : instances)
    if (!inst.label) throw DataError("cross-validation requires labeled instances");

  auto folds = kfold_split(instances.size(), options.folds, options.seed);
  CvResult result;
  result.fold_reports.reserve(folds.size());

  const std::size_t embed_dim = embeddings ? embeddings->dim() : 0;
  const std::size_t num_clusters = clusters ? clusters->num_classes() : 0;

  for (const auto& [train_idx, held_idx] : folds) {
    std::vector<RelationInstance> train, heldout;
    train.reserve(train_idx.size());
    heldout.reserve(held_idx.size());
    for (std::size_t i : train_idx) train.push_back(instances[i]);
    for (std::size_t i : held_idx) heldout.push_back(instances[i]);

    FeatureSpace space = build_feature_space(
        train, options.transductive ? heldout : std::vector<RelationInstance>{}, families,
        embed_dim, num_clusters);

    VectorizeStats stats;
    auto train_vecs =
        vectorize_all(train, space, embeddings, clusters, VectorizeMode::Train, &stats);
    Model model = train_ovr(train_vecs, space, train_config);

    std::vector<std::string> gold, pred;
    gold.reserve(heldout.size());
    pred.reserve(heldout.size());
    for (const auto& inst : heldout) {
      FeatureVector fv =
          vectorize(inst, space, embeddings, clusters, VectorizeMode::Predict, &stats);
      gold.push_back(*inst.label);
      pred.push_back(predict(model, fv));
    }
    result.truncated_instances += stats.truncated;
    result.fold_reports.push_back(score(gold, pred));
  }

  double sum = 0.0;
  for (const auto& r : result.fold_reports) sum += r.macro_f1;
  result.mean_macro_f1 = sum / static_cast<double>(result.fold_reports.size());
  return result;
}

void print_report(const EvaluationReport& report, std::ostream& out) {
  std::size_t width = 5;
  for (const auto& ls : report.per_label) width = std::max(width, ls.label.size());

  out << std::left << std::setw(static_cast<int>(width)) << "label"
      << "  " << std::right << std::setw(9) << "precision" << std::setw(9) << "recall"
      << std::setw(9) << "f1" << std::setw(9) << "support" << '\n';
  std::ostream::fmtflags flags = out.flags();
  out << std::fixed << std::setprecision(4);
  for (const auto& ls : report.per_label) {
    out << std::left << std::setw(static_cast<int>(width)) << ls.label << "  " << std::right
        << std::setw(9) << ls.precision << std::setw(9) << ls.recall << std::setw(9) << ls.f1
        << std::setw(9) << ls.support << '\n';
  }
  out << std::left << std::setw(static_cast<int>(width)) << "macro-F1"
      << "  " << std::right << std::setw(9) << report.macro_f1 << '\n';
  out << std::left << std::setw(static_cast<int>(width)) << "accuracy"
      << "  " << std::right << std::setw(9) << report.micro_accuracy << '\n';
  out.flags(flags);
}

void print_report_kv(const EvaluationReport& report, std::ostream& out) {
  std::ostream::fmtflags flags = out.flags();
  out << std::setprecision(10);
  for (const auto& ls : report.per_label) {
    out << "precision[" << ls.label << "] = " << ls.precision << '\n';
    out << "recall[" << ls.label << "] = " << ls.recall << '\n';
    out << "f1[" << ls.label << "] = " << ls.f1 << '\n';
    out << "support[" << ls.label << "] = " << ls.support << '\n';
  }
  out << "macro_f1 = " << report.macro_f1 << '\n';
  out << "micro_accuracy = " << report.micro_accuracy << '\n';
  out.flags(flags);
}

}  // namespace relclass
