#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "relclass/featurizer.hpp"

namespace relclass {

struct TrainConfig {
  double cost = 0.1;
  double eps = 0.1;
  std::size_t max_outer_iters = 1000;
  std::uint64_t seed = 1;
  bool add_bias = false;  // appends a constant-1 feature when set
};

struct SolveStats {
  std::size_t passes = 0;
  bool converged = false;
  double final_violation = 0.0;
  std::vector<double> dual_objective_per_pass;  // filled when requested
};

// Trains one binary L2-regularized L2-loss SVM by dual coordinate descent:
//
//   min_a  0.5 a^T (Q + D) a - e^T a,   s.t. 0 <= a_i,
//
// where Q_ij = y_i y_j x_i.x_j and D_ii = 1/(2C), which is the dual of
//
//   min_w  0.5 ||w||^2 + C sum_i max(0, 1 - y_i w.x_i)^2.
//
// One coordinate is updated at a time over a seeded random permutation per
// pass; w is maintained incrementally as sum_i a_i y_i x_i. Terminates when
// the largest projected-gradient violation over a full pass drops below eps,
// or after max_outer_iters passes with a warning to stderr.
std::vector<double> solve_binary_dual_cd(const std::vector<FeatureVector>& data,
                                         const std::vector<int>& polarity, std::size_t dim,
                                         const TrainConfig& config, SolveStats* stats = nullptr);

class Model {
 public:
  FeatureSpace space;
  std::vector<std::vector<double>> weights;  // one row per class id
  TrainConfig config;

  std::size_t num_classes() const { return weights.size(); }
  std::size_t dim() const { return space.total_dim(); }
};

// One-vs-rest reduction: one binary problem per label, trained independently
// and deterministically for the given seed.
Model train_ovr(const std::vector<FeatureVector>& data, const FeatureSpace& space,
                const TrainConfig& config);

// Per-class scores w_c . x (plus the bias weight when configured).
std::vector<double> decision_values(const Model& model, const FeatureVector& fv);

// Label of the argmax decision value; ties break toward the lowest class id.
const std::string& predict(const Model& model, const FeatureVector& fv);

// Versioned text serialization. load(save(m)) restores weights bit-for-bit
// (17 significant digits) along with the full feature space.
void save_model(const Model& model, std::ostream& out);
Model load_model(std::istream& in);

double dot(const std::vector<double>& w, const FeatureVector& fv, bool add_bias = false);

}  // namespace relclass
