#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "helpers/qp_oracle.hpp"
#include "helpers/synthetic.hpp"
#include "relclass/classifier.hpp"

using namespace relclass;
using relclass::testing::DenseProblem;
using relclass::testing::dense_row_vector;
using relclass::testing::primal_objective;
using relclass::testing::solve_dual_projected_gradient;

namespace {

// x = (+1) labeled +1, x = (-1) labeled -1, C = 0.1. The dual has the closed
// form alpha = (1/7, 1/7), giving w = 2/7 and primal objective 1/7.
DenseProblem two_point_problem() {
  DenseProblem p;
  p.x = {{1.0}, {-1.0}};
  p.y = {+1, -1};
  p.cost = 0.1;
  return p;
}

DenseProblem random_problem(std::mt19937_64& rng, std::size_t n, std::size_t dim, double cost) {
  DenseProblem p;
  p.cost = cost;
  p.x.resize(n, std::vector<double>(dim));
  p.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : p.x[i]) v = (static_cast<double>(rng() % 2001) - 1000.0) / 1000.0;
    p.y[i] = (rng() % 2 == 0) ? +1 : -1;
  }
  return p;
}

std::vector<FeatureVector> to_vectors(const DenseProblem& p) {
  std::vector<FeatureVector> out;
  out.reserve(p.x.size());
  for (const auto& row : p.x) out.push_back(dense_row_vector(row));
  return out;
}

TrainConfig tight_config(double cost) {
  TrainConfig cfg;
  cfg.cost = cost;
  cfg.eps = 1e-8;
  cfg.max_outer_iters = 200000;
  cfg.seed = 9;
  return cfg;
}

}  // namespace

TEST_CASE("qp oracle solves the two-point problem analytically") {
  auto sol = solve_dual_projected_gradient(two_point_problem());
  REQUIRE(sol.alpha.size() == 2);
  CHECK(sol.alpha[0] == doctest::Approx(1.0 / 7.0).epsilon(1e-8));
  CHECK(sol.alpha[1] == doctest::Approx(1.0 / 7.0).epsilon(1e-8));
  CHECK(sol.w[0] == doctest::Approx(2.0 / 7.0).epsilon(1e-8));
  CHECK(sol.primal == doctest::Approx(1.0 / 7.0).epsilon(1e-10));
}

TEST_CASE("solve_binary_dual_cd: two-point problem separates and matches the optimum") {
  DenseProblem p = two_point_problem();
  auto w = solve_binary_dual_cd(to_vectors(p), p.y, 1, tight_config(p.cost));
  REQUIRE(w.size() == 1);
  CHECK(w[0] > 0.0);
  CHECK(w[0] * 1.0 > 0.0);
  CHECK(w[0] * -1.0 < 0.0);
  CHECK(primal_objective(p, w) == doctest::Approx(1.0 / 7.0).epsilon(1e-6));
}

TEST_CASE("solve_binary_dual_cd: all-zero vectors give a zero weight vector") {
  DenseProblem p;
  p.x = {{0, 0, 0}, {0, 0, 0}};
  p.y = {+1, -1};
  p.cost = 0.1;
  auto w = solve_binary_dual_cd(to_vectors(p), p.y, 3, tight_config(p.cost));
  for (double wi : w) CHECK(wi == 0.0);
}

TEST_CASE("solve_binary_dual_cd: matches the projected-gradient oracle on random data") {
  std::mt19937_64 rng(123);
  DenseProblem p = random_problem(rng, 20, 5, 0.1);
  auto w = solve_binary_dual_cd(to_vectors(p), p.y, 5, tight_config(p.cost));
  auto oracle = solve_dual_projected_gradient(p);
  double cd = primal_objective(p, w);
  CHECK(std::fabs(cd - oracle.primal) <= 1e-4 * std::max(1e-12, std::fabs(oracle.primal)));
}

TEST_CASE("solve_binary_dual_cd: dual objective never increases across passes") {
  std::mt19937_64 rng(7);
  DenseProblem p = random_problem(rng, 15, 4, 1.0);
  SolveStats stats;
  solve_binary_dual_cd(to_vectors(p), p.y, 4, tight_config(p.cost), &stats);
  REQUIRE(stats.converged);
  REQUIRE(stats.dual_objective_per_pass.size() >= 2);
  for (std::size_t i = 1; i < stats.dual_objective_per_pass.size(); ++i)
    CHECK(stats.dual_objective_per_pass[i] <=
          stats.dual_objective_per_pass[i - 1] + 1e-12);
  // every dual variable meets the projected-gradient condition at the end
  CHECK(stats.final_violation < 1e-8);
}

TEST_CASE("solve_binary_dual_cd: deterministic for a fixed seed") {
  std::mt19937_64 rng(31);
  DenseProblem p = random_problem(rng, 12, 3, 0.1);
  TrainConfig cfg = tight_config(p.cost);
  auto w1 = solve_binary_dual_cd(to_vectors(p), p.y, 3, cfg);
  auto w2 = solve_binary_dual_cd(to_vectors(p), p.y, 3, cfg);
  CHECK(w1 == w2);
}

TEST_CASE("solve_binary_dual_cd: NaN input is rejected") {
  DenseProblem p = two_point_problem();
  auto vecs = to_vectors(p);
  vecs[0].dense[0].values[0] = std::nan("");
  CHECK_THROWS_AS(solve_binary_dual_cd(vecs, p.y, 1, tight_config(0.1)), DataError);
}

TEST_CASE("solve_binary_dual_cd: indices beyond the stated dimension are rejected") {
  FeatureVector fv;
  fv.indices = {0, 5};
  CHECK_THROWS_AS(solve_binary_dual_cd({fv}, {+1}, 3, tight_config(0.1)), DataError);
}

namespace {

// Small labeled dataset helpers for the one-vs-rest tests.
FeatureSpace word_space(const std::vector<RelationInstance>& train, FamilySet fams) {
  return build_feature_space(train, {}, fams, 0, 0);
}

RelationInstance toy_inst(std::vector<std::string> tokens, const std::string& label) {
  RelationInstance inst;
  inst.abstract_id = "Z1";
  inst.e1_id = "Z1.1";
  inst.e2_id = "Z1.2";
  inst.tokens = std::move(tokens);
  inst.label = label;
  inst.sentence_len = inst.tokens.size();
  return inst;
}

}  // namespace

TEST_CASE("train_ovr: one weight vector per class") {
  FamilySet fams = FamilySet::none();
  fams.word = fams.ctx1 = fams.ctx2 = true;
  std::vector<RelationInstance> insts = {
      toy_inst({"e1", "alpha", "e2"}, "A"),
      toy_inst({"e1", "beta", "e2"}, "B"),
      toy_inst({"e1", "gamma", "e2"}, "C"),
      toy_inst({"e1", "alpha", "x", "e2"}, "A"),
  };
  auto space = word_space(insts, fams);
  auto vecs = vectorize_all(insts, space, nullptr, nullptr, VectorizeMode::Train);
  auto model = train_ovr(vecs, space, TrainConfig{});
  CHECK(model.num_classes() == 3);
  for (const auto& row : model.weights) CHECK(row.size() == space.total_dim());
}

TEST_CASE("train_ovr: linearly separable data is fit exactly") {
  FamilySet fams = FamilySet::none();
  fams.word = fams.ctx1 = fams.ctx2 = true;
  std::vector<RelationInstance> insts;
  for (int i = 0; i < 20; ++i) {
    bool a = i % 2 == 0;
    insts.push_back(toy_inst({"e1", a ? "alpha" : "beta", "w" + std::to_string(i % 5), "e2"},
                             a ? "A" : "B"));
  }
  auto space = word_space(insts, fams);
  auto vecs = vectorize_all(insts, space, nullptr, nullptr, VectorizeMode::Train);
  TrainConfig cfg;
  cfg.cost = 1.0;
  cfg.eps = 0.01;
  auto model = train_ovr(vecs, space, cfg);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < insts.size(); ++i)
    if (predict(model, vecs[i]) == *insts[i].label) ++correct;
  CHECK(correct == insts.size());
}

TEST_CASE("train_ovr: a single class is refused") {
  FamilySet fams = FamilySet::none();
  fams.word = true;
  std::vector<RelationInstance> insts = {toy_inst({"e1", "e2"}, "ONLY")};
  auto space = word_space(insts, fams);
  auto vecs = vectorize_all(insts, space, nullptr, nullptr, VectorizeMode::Train);
  CHECK_THROWS_WITH_AS(train_ovr(vecs, space, TrainConfig{}), doctest::Contains(">=2"),
                       DataError);
}

TEST_CASE("train_ovr: twelve directed labels get twelve rows") {
  FamilySet fams = FamilySet::none();
  fams.word = true;
  const std::vector<std::string> types = {"USAGE",       "MODEL-FEATURE", "PART_WHOLE",
                                          "TOPIC",       "RESULT",        "COMPARE"};
  std::vector<RelationInstance> insts;
  int n = 0;
  for (const auto& t : types)
    for (int rev = 0; rev < 2; ++rev)
      insts.push_back(toy_inst({"e1", "w" + std::to_string(n++), "e2"},
                               rev ? t + " REVERSE" : t));
  auto space = word_space(insts, fams);
  auto vecs = vectorize_all(insts, space, nullptr, nullptr, VectorizeMode::Train);
  auto model = train_ovr(vecs, space, TrainConfig{});
  CHECK(model.num_classes() == 12);
}

TEST_CASE("decision_values and predict") {
  FamilySet fams = FamilySet::none();
  fams.word = true;
  std::vector<RelationInstance> insts = {toy_inst({"e1", "x", "e2"}, "A"),
                                         toy_inst({"e1", "y", "e2"}, "B")};
  auto space = word_space(insts, fams);
  Model model;
  model.space = space;
  model.weights = {std::vector<double>(space.total_dim(), 0.0),
                   std::vector<double>(space.total_dim(), 0.0)};

  FeatureVector zero;
  SUBCASE("zero vector scores zero everywhere") {
    auto scores = decision_values(model, zero);
    CHECK(scores == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("all-zero weights score zero on any vector") {
    FeatureVector fv;
    fv.indices = {1, 4};
    fv.dense.push_back({6, {0.5, -2.0}});
    CHECK(decision_values(model, fv) == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("a one-hot vector reads the weight at its index") {
    model.weights[0][3] = 0.25;
    model.weights[1][3] = -1.5;
    FeatureVector fv;
    fv.indices = {3};
    auto scores = decision_values(model, fv);
    CHECK(scores[0] == 0.25);
    CHECK(scores[1] == -1.5);
  }
  SUBCASE("argmax wins, ties break to the lowest class id") {
    model.weights[0][0] = 0.5;
    model.weights[1][0] = 0.5;
    FeatureVector fv;
    fv.indices = {0};
    CHECK(predict(model, fv) == "A");
    model.weights[1][0] = 0.9;
    CHECK(predict(model, fv) == "B");
  }
  SUBCASE("scaling every row by the same positive factor changes nothing") {
    std::mt19937_64 rng(71);
    for (auto& row : model.weights)
      for (auto& w : row) w = (static_cast<double>(rng() % 200) - 100.0) / 50.0;
    Model scaled = model;
    for (auto& row : scaled.weights)
      for (auto& w : row) w *= 3.0;
    for (int i = 0; i < 30; ++i) {
      FeatureVector fv;
      for (std::size_t j = 0; j < space.total_dim(); ++j)
        if (rng() % 3 == 0) fv.indices.push_back(static_cast<std::uint32_t>(j));
      CHECK(predict(model, fv) == predict(scaled, fv));
    }
  }
  SUBCASE("dimension mismatch is an error") {
    FeatureVector fv;
    fv.indices = {static_cast<std::uint32_t>(space.total_dim())};
    CHECK_THROWS_AS(decision_values(model, fv), DataError);
  }
  SUBCASE("appending all-zero dimensions to the weight rows changes no prediction") {
    std::mt19937_64 rng(73);
    for (auto& row : model.weights)
      for (auto& w : row) w = (static_cast<double>(rng() % 200) - 100.0) / 50.0;
    Model padded = model;
    for (auto& row : padded.weights) row.insert(row.end(), 4, 0.0);
    for (int i = 0; i < 30; ++i) {
      FeatureVector fv;  // zero dims of a sparse vector are structurally absent
      for (std::size_t j = 0; j < space.total_dim(); ++j)
        if (rng() % 3 == 0) fv.indices.push_back(static_cast<std::uint32_t>(j));
      CHECK(predict(model, fv) == predict(padded, fv));
    }
  }
}

TEST_CASE("model serialization round-trips bit for bit") {
  FamilySet fams = FamilySet::all_minus_shape();
  std::vector<RelationInstance> insts = {
      toy_inst({"e1", "alpha", "e2"}, "A"),
      toy_inst({"e1", "beta", "gamma", "e2"}, "B"),
      toy_inst({"e1", "e2"}, "A"),
  };
  EmbeddingTable emb(2);
  emb.insert("alpha", {0.123456789012345, -7.5});
  emb.insert("e1", {1e-30, 2.25});
  ClusterMap clu(3);
  clu.insert("alpha", 2);
  clu.insert("beta", 0);
  auto space = build_feature_space(insts, {}, fams, 2, 3);
  auto vecs = vectorize_all(insts, space, &emb, &clu, VectorizeMode::Train);
  auto model = train_ovr(vecs, space, TrainConfig{});

  std::stringstream buf;
  save_model(model, buf);
  Model loaded = load_model(buf);

  CHECK(loaded.weights == model.weights);
  CHECK(loaded.space.k == model.space.k);
  CHECK(loaded.space.total_dim() == model.space.total_dim());
  CHECK(loaded.space.families == model.space.families);
  CHECK(loaded.space.vocab.items() == model.space.vocab.items());
  CHECK(loaded.space.ctx_vocab.items() == model.space.ctx_vocab.items());
  CHECK(loaded.space.labels.items() == model.space.labels.items());
  CHECK(loaded.config.cost == model.config.cost);

  for (const auto& fv : vecs)
    CHECK(predict(loaded, fv) == predict(model, fv));
}

TEST_CASE("load_model: wrong magic and truncation are errors") {
  std::stringstream bad("linear-model 1\n");
  CHECK_THROWS_AS(load_model(bad), ParseError);

  FamilySet fams = FamilySet::none();
  fams.word = true;
  std::vector<RelationInstance> insts = {toy_inst({"e1", "e2"}, "A"),
                                         toy_inst({"e1", "x", "e2"}, "B")};
  auto space = build_feature_space(insts, {}, fams, 0, 0);
  auto vecs = vectorize_all(insts, space, nullptr, nullptr, VectorizeMode::Train);
  auto model = train_ovr(vecs, space, TrainConfig{});
  std::stringstream buf;
  save_model(model, buf);
  std::string full = buf.str();
  std::stringstream cut(full.substr(0, full.size() * 2 / 3));
  CHECK_THROWS_AS(load_model(cut), ParseError);
}

TEST_CASE("bias flag: a constant-1 feature is carried through training and serialization") {
  FamilySet fams = FamilySet::none();
  fams.word = true;
  std::vector<RelationInstance> insts = {toy_inst({"e1", "x", "e2"}, "A"),
                                         toy_inst({"e1", "y", "e2"}, "B"),
                                         toy_inst({"e1", "x", "z", "e2"}, "A")};
  auto space = build_feature_space(insts, {}, fams, 0, 0);
  auto vecs = vectorize_all(insts, space, nullptr, nullptr, VectorizeMode::Train);
  TrainConfig cfg;
  cfg.add_bias = true;
  auto model = train_ovr(vecs, space, cfg);
  for (const auto& row : model.weights) CHECK(row.size() == space.total_dim() + 1);

  std::stringstream buf;
  save_model(model, buf);
  Model loaded = load_model(buf);
  CHECK(loaded.config.add_bias);
  CHECK(loaded.weights == model.weights);
  for (const auto& fv : vecs)
    CHECK(decision_values(loaded, fv) == decision_values(model, fv));
}

TEST_CASE("load_model: a hand-written single-class model always predicts its class") {
  // word family, k=0: 2 slots x (2+1) word ids = dim 6
  std::string text =
      "relclass-model 1\n"
      "cost 0.1\n"
      "eps 0.1\n"
      "bias 0\n"
      "seed 1\n"
      "classes 1\n"
      "dim 6\n"
      "k 0\n"
      "families word\n"
      "embed_dim 0\n"
      "num_clusters 0\n"
      "labels 1\n"
      "ONLY-CLASS\n"
      "vocab 2\n"
      "alpha\n"
      "beta\n"
      "ctx_vocab 0\n"
      "weights\n"
      "0 0 0.5 0 0 0\n";
  std::stringstream in(text);
  Model model = load_model(in);
  CHECK(model.num_classes() == 1);
  for (std::uint32_t i = 0; i < 6; ++i) {
    FeatureVector fv;
    fv.indices = {i};
    CHECK(predict(model, fv) == "ONLY-CLASS");
  }
}
