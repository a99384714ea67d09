#include "relclass/classifier.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace relclass {

namespace {

// mt19937_64 output is fully specified by the standard; drawing bounded
// values by modulo keeps shuffles reproducible across platforms.
void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[rng() % i]);
}

void axpy(double a, const FeatureVector& fv, std::vector<double>& w, bool add_bias) {
  for (std::uint32_t i : fv.indices) w[i] += a;
  for (const auto& seg : fv.dense) {
    double* wp = w.data() + seg.offset;
    for (std::size_t j = 0; j < seg.values.size(); ++j) wp[j] += a * seg.values[j];
  }
  if (add_bias) w.back() += a;
}

void validate_vectors(const std::vector<FeatureVector>& data, std::size_t dim) {
  for (const auto& fv : data) {
    if (!fv.indices.empty() && fv.indices.back() >= dim)
      throw DataError("feature index " + std::to_string(fv.indices.back()) +
                      " exceeds dimension " + std::to_string(dim));
    for (const auto& seg : fv.dense) {
      if (seg.offset + seg.values.size() > dim)
        throw DataError("dense segment exceeds dimension " + std::to_string(dim));
      for (double v : seg.values)
        if (std::isnan(v)) throw DataError("NaN feature value in input");
    }
  }
}

}  // namespace

double dot(const std::vector<double>& w, const FeatureVector& fv, bool add_bias) {
  double v = 0.0;
  for (std::uint32_t i : fv.indices) v += w[i];
  for (const auto& seg : fv.dense) {
    const double* wp = w.data() + seg.offset;
    for (std::size_t j = 0; j < seg.values.size(); ++j) v += wp[j] * seg.values[j];
  }
  if (add_bias) v += w.back();
  return v;
}

std::vector<double> solve_binary_dual_cd(const std::vector<FeatureVector>& data,
                                         const std::vector<int>& polarity, std::size_t dim,
                                         const TrainConfig& config, SolveStats* stats) {
  if (data.empty()) throw DataError("empty training set");
  if (polarity.size() != data.size()) throw DataError("polarity/instance count mismatch");
  if (config.cost <= 0 || config.eps <= 0) throw DataError("cost and eps must be positive");
  validate_vectors(data, dim);

  const std::size_t l = data.size();
  const std::size_t w_size = dim + (config.add_bias ? 1 : 0);
  const double diag = 0.5 / config.cost;  // D_ii for the L2-loss dual

  std::vector<double> w(w_size, 0.0);
  std::vector<double> alpha(l, 0.0);
  std::vector<double> qd(l);
  for (std::size_t i = 0; i < l; ++i)
    qd[i] = data[i].norm_sq() + (config.add_bias ? 1.0 : 0.0) + diag;

  std::vector<std::size_t> order(l);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);

  auto dual_objective = [&]() {
    double obj = 0.0;
    for (double wi : w) obj += wi * wi;
    for (double a : alpha) obj += a * (a * diag - 2.0);
    return 0.5 * obj;
  };
#ifndef NDEBUG
  double prev_objective = std::numeric_limits<double>::infinity();
#endif

  std::size_t pass = 0;
  bool converged = false;
  double max_violation = 0.0;
  for (; pass < config.max_outer_iters; ++pass) {
    shuffle_indices(order, rng);
    max_violation = 0.0;

    for (std::size_t s = 0; s < l; ++s) {
      std::size_t i = order[s];
      const double yi = polarity[i] > 0 ? 1.0 : -1.0;
      const FeatureVector& xi = data[i];

      double g = yi * dot(w, xi, config.add_bias) - 1.0 + alpha[i] * diag;
      // Projected gradient at the box constraint a_i >= 0 (no upper bound for
      // the L2 loss).
      double pg = (alpha[i] == 0.0) ? std::min(g, 0.0) : g;
      max_violation = std::max(max_violation, std::fabs(pg));

      if (std::fabs(pg) > 1.0e-12) {
        double old = alpha[i];
        alpha[i] = std::max(alpha[i] - g / qd[i], 0.0);
        axpy((alpha[i] - old) * yi, xi, w, config.add_bias);
      }
    }

#ifndef NDEBUG
    {
      // The dual objective must never increase across passes.
      double obj = dual_objective();
      assert(obj <= prev_objective + 1e-9 * (1.0 + std::fabs(prev_objective)));
      prev_objective = obj;
    }
#endif
    if (stats) stats->dual_objective_per_pass.push_back(dual_objective());

    if (max_violation < config.eps) {
      converged = true;
      ++pass;
      break;
    }
  }

  if (!converged)
    std::cerr << "warning: dual coordinate descent hit the pass limit ("
              << config.max_outer_iters << ") with violation " << max_violation << "\n";
  if (stats) {
    stats->passes = pass;
    stats->converged = converged;
    stats->final_violation = max_violation;
  }
  return w;
}

Model train_ovr(const std::vector<FeatureVector>& data, const FeatureSpace& space,
                const TrainConfig& config) {
  if (data.empty()) throw DataError("empty training set");
  for (const auto& fv : data)
    if (!fv.label) throw DataError("unlabeled instance in training data");
  if (space.labels.size() < 2) throw DataError("need >=2 classes to train");
  validate_vectors(data, space.total_dim());

  Model model;
  model.space = space;
  model.config = config;
  model.weights.resize(space.labels.size());

  const std::size_t n_class = space.labels.size();
  std::vector<int> polarity(data.size());
  for (std::size_t c = 0; c < n_class; ++c) {
    for (std::size_t i = 0; i < data.size(); ++i)
      polarity[i] = (*data[i].label == c) ? +1 : -1;
    TrainConfig per_class = config;
    per_class.seed = config.seed + c;  // independent, reproducible subproblems
    model.weights[c] = solve_binary_dual_cd(data, polarity, space.total_dim(), per_class);
  }
  return model;
}

std::vector<double> decision_values(const Model& model, const FeatureVector& fv) {
  const std::size_t dim = model.dim();
  if (!fv.indices.empty() && fv.indices.back() >= dim)
    throw DataError("vector dimension exceeds model dimension");
  for (const auto& seg : fv.dense)
    if (seg.offset + seg.values.size() > dim)
      throw DataError("vector dimension exceeds model dimension");

  std::vector<double> scores(model.num_classes());
  for (std::size_t c = 0; c < scores.size(); ++c)
    scores[c] = dot(model.weights[c], fv, model.config.add_bias);
  return scores;
}

const std::string& predict(const Model& model, const FeatureVector& fv) {
  std::vector<double> scores = decision_values(model, fv);
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c)
    if (scores[c] > scores[best]) best = c;
  return model.space.labels.at(best);
}

namespace {

constexpr const char* kMagic = "relclass-model";
constexpr int kVersion = 1;

void write_index(std::ostream& out, const char* name, const StringIndex& ix) {
  out << name << ' ' << ix.size() << '\n';
  for (const auto& s : ix.items()) out << s << '\n';
}

StringIndex read_index(std::istream& in, const std::string& expect) {
  std::string name;
  std::size_t n = 0;
  if (!(in >> name >> n) || name != expect)
    throw ParseError("model file: expected \"" + expect + "\" table");
  in.ignore();  // newline
  StringIndex ix;
  std::string line;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw ParseError("model file truncated in " + expect + " table");
    ix.add(line);
  }
  if (ix.size() != n) throw ParseError("model file: duplicate entry in " + expect + " table");
  return ix;
}

}  // namespace

void save_model(const Model& model, std::ostream& out) {
  const FeatureSpace& sp = model.space;
  out << kMagic << ' ' << kVersion << '\n';
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", model.config.cost);
  out << "cost " << buf << '\n';
  std::snprintf(buf, sizeof(buf), "%.17g", model.config.eps);
  out << "eps " << buf << '\n';
  out << "bias " << (model.config.add_bias ? 1 : 0) << '\n';
  out << "seed " << model.config.seed << '\n';
  out << "classes " << model.num_classes() << '\n';
  out << "dim " << sp.total_dim() << '\n';
  out << "k " << sp.k << '\n';
  out << "families " << family_set_to_string(sp.families) << '\n';
  out << "embed_dim " << sp.embed_dim << '\n';
  out << "num_clusters " << sp.num_clusters << '\n';
  write_index(out, "labels", sp.labels);
  write_index(out, "vocab", sp.vocab);
  write_index(out, "ctx_vocab", sp.ctx_vocab);
  out << "weights\n";
  const std::size_t row_len = sp.total_dim() + (model.config.add_bias ? 1 : 0);
  for (const auto& row : model.weights) {
    if (row.size() != row_len) throw DataError("weight row length does not match dimension");
    for (std::size_t j = 0; j < row.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
      out << (j ? " " : "") << buf;
    }
    out << '\n';
  }
}

Model load_model(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic)
    throw ParseError("not a model file (bad magic)");
  if (version != kVersion)
    throw ParseError("unsupported model version " + std::to_string(version));

  Model model;
  FeatureSpace& sp = model.space;
  std::string key;
  std::size_t classes = 0, dim = 0;
  auto expect_key = [&](const char* want) {
    if (!(in >> key) || key != want)
      throw ParseError(std::string("model file: expected \"") + want + "\"");
  };
  expect_key("cost");
  in >> model.config.cost;
  expect_key("eps");
  in >> model.config.eps;
  expect_key("bias");
  int bias = 0;
  in >> bias;
  model.config.add_bias = bias != 0;
  expect_key("seed");
  in >> model.config.seed;
  expect_key("classes");
  in >> classes;
  expect_key("dim");
  in >> dim;
  expect_key("k");
  in >> sp.k;
  expect_key("families");
  std::string fams;
  in >> fams;
  sp.families = family_set_from_string(fams);
  expect_key("embed_dim");
  in >> sp.embed_dim;
  expect_key("num_clusters");
  in >> sp.num_clusters;
  if (!in) throw ParseError("model file: malformed header");

  sp.labels = read_index(in, "labels");
  sp.vocab = read_index(in, "vocab");
  sp.ctx_vocab = read_index(in, "ctx_vocab");
  if (sp.labels.size() != classes)
    throw ParseError("model file: label table does not match class count");
  if (sp.total_dim() != dim)
    throw ParseError("model file: stated dimension " + std::to_string(dim) +
                     " does not match reconstructed layout " + std::to_string(sp.total_dim()));

  std::string marker;
  if (!(in >> marker) || marker != "weights") throw ParseError("model file: missing weights");
  const std::size_t row_len = dim + (model.config.add_bias ? 1 : 0);
  model.weights.assign(classes, std::vector<double>(row_len));
  for (std::size_t c = 0; c < classes; ++c)
    for (std::size_t j = 0; j < row_len; ++j)
      if (!(in >> model.weights[c][j]))
        throw ParseError("model file truncated in weight row " + std::to_string(c));
  return model;
}

}  // namespace relclass
