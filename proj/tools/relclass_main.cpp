#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relclass/classifier.hpp"
#include "relclass/corpus.hpp"
#include "relclass/evaluation.hpp"
#include "relclass/featurizer.hpp"
#include "relclass/resources.hpp"

namespace {

using namespace relclass;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Thrown for command-line level problems (missing arguments, bad config
// keys); maps to the usage exit code.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open \"" + path + "\" for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open \"" + path + "\" for writing");
  return out;
}

struct Options {
  std::string config;
  std::string abstracts;
  std::string relations;
  std::string embeddings;
  std::string clusters;
  std::string model;
  std::string out;
  std::string pairs;
  std::string test_abstracts;
  std::string test_pairs;
  std::string dump_vectors;
  std::string ablate;
  std::string transductive = "on";
  double cost = 0.1;
  double eps = 0.1;
  std::uint64_t seed = 1;
  std::size_t folds = 5;
  bool bias = false;
};

// Flat `key = value` config file. CLI flags win: a key only applies when its
// option was not given on the command line.
void apply_config_file(const CLI::App& cmd, Options& o) {
  std::ifstream in(o.config);
  if (!in) throw DataError("cannot open config file \"" + o.config + "\"");

  auto untouched = [&cmd](const std::string& flag) {
    const CLI::Option* opt = cmd.get_option_no_throw(flag);
    return opt != nullptr && opt->count() == 0;
  };
  std::map<std::string, std::function<void(const std::string&)>> setters = {
      {"abstracts", [&](const std::string& v) { o.abstracts = v; }},
      {"relations", [&](const std::string& v) { o.relations = v; }},
      {"embeddings", [&](const std::string& v) { o.embeddings = v; }},
      {"clusters", [&](const std::string& v) { o.clusters = v; }},
      {"model", [&](const std::string& v) { o.model = v; }},
      {"out", [&](const std::string& v) { o.out = v; }},
      {"pairs", [&](const std::string& v) { o.pairs = v; }},
      {"test-abstracts", [&](const std::string& v) { o.test_abstracts = v; }},
      {"test-pairs", [&](const std::string& v) { o.test_pairs = v; }},
      {"dump-vectors", [&](const std::string& v) { o.dump_vectors = v; }},
      {"ablate", [&](const std::string& v) { o.ablate = v; }},
      {"transductive", [&](const std::string& v) { o.transductive = v; }},
      {"cost", [&](const std::string& v) { o.cost = std::stod(v); }},
      {"eps", [&](const std::string& v) { o.eps = std::stod(v); }},
      {"seed", [&](const std::string& v) { o.seed = std::stoull(v); }},
      {"folds", [&](const std::string& v) { o.folds = std::stoull(v); }},
      {"bias", [&](const std::string& v) { o.bias = (v == "1" || v == "true" || v == "on"); }},
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto strip = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string stripped = strip(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = strip(stripped.substr(0, eq));
    std::string value = strip(stripped.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end())
      throw UsageError("config line " + std::to_string(lineno) + ": unknown key \"" + key +
                       "\"");
    if (untouched("--" + key)) it->second(value);
  }
}

void require_set(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

void validate_numbers(const Options& o) {
  if (o.cost <= 0) throw UsageError("--cost must be positive");
  if (o.eps <= 0) throw UsageError("--eps must be positive");
  if (o.folds < 2) throw UsageError("--folds must be at least 2");
  if (o.transductive != "on" && o.transductive != "off")
    throw UsageError("--transductive must be on or off");
  if (!o.ablate.empty() && o.ablate != "all" && o.ablate != "no-shape" && o.ablate != "no-e2ctx")
    throw UsageError("--ablate must be one of: all, no-shape, no-e2ctx");
}

// Default is the competition-best setting: everything but shape.
FamilySet families_from(const Options& o) {
  if (o.ablate.empty() || o.ablate == "no-shape") return FamilySet::all_minus_shape();
  if (o.ablate == "all") return FamilySet::all();
  return FamilySet::all_minus_ctx2();
}

TrainConfig train_config_from(const Options& o) {
  TrainConfig cfg;
  cfg.cost = o.cost;
  cfg.eps = o.eps;
  cfg.seed = o.seed;
  cfg.add_bias = o.bias;
  return cfg;
}

struct Resources {
  std::optional<EmbeddingTable> embeddings;
  std::optional<ClusterMap> clusters;

  const EmbeddingTable* embeddings_ptr() const { return embeddings ? &*embeddings : nullptr; }
  const ClusterMap* clusters_ptr() const { return clusters ? &*clusters : nullptr; }
};

Resources load_resources(const Options& o, FamilySet families) {
  Resources r;
  if (families.embedding) {
    if (o.embeddings.empty())
      throw UsageError("--embeddings is required while the embedding feature family is enabled");
    auto in = open_input(o.embeddings);
    r.embeddings = load_embeddings(in);
  }
  if (families.cluster) {
    if (o.clusters.empty())
      throw UsageError("--clusters is required while the cluster feature family is enabled");
    auto in = open_input(o.clusters);
    r.clusters = load_clusters(in);
  }
  return r;
}

std::vector<RelationInstance> read_labeled_instances(const Options& o) {
  auto ain = open_input(o.abstracts);
  auto docs = parse_abstracts(ain);
  auto rin = open_input(o.relations);
  auto rels = parse_relations(rin);
  return extract_instances(docs, rels);
}

std::string answer_line(const std::string& label, const EntityPair& pair) {
  std::string rel_type = label;
  bool reversed = false;
  constexpr std::string_view kSuffix = " REVERSE";
  if (rel_type.size() > kSuffix.size() &&
      rel_type.compare(rel_type.size() - kSuffix.size(), kSuffix.size(), kSuffix) == 0) {
    rel_type.resize(rel_type.size() - kSuffix.size());
    reversed = true;
  }
  return rel_type + "(" + pair.e1 + "," + pair.e2 + (reversed ? ",REVERSE)" : ")");
}

int cmd_train(const Options& o) {
  require_set(o.abstracts, "--abstracts");
  require_set(o.relations, "--relations");
  require_set(o.model, "--model");
  FamilySet families = families_from(o);
  Resources res = load_resources(o, families);

  auto instances = read_labeled_instances(o);

  std::vector<RelationInstance> extra;
  if (o.transductive == "on" && !o.test_abstracts.empty() && !o.test_pairs.empty()) {
    auto ain = open_input(o.test_abstracts);
    auto docs = parse_abstracts(ain);
    auto pin = open_input(o.test_pairs);
    auto pairs = parse_entity_pairs(pin);
    extra = extract_instances(docs, pairs);
  }

  auto t0 = std::chrono::steady_clock::now();
  FeatureSpace space =
      build_feature_space(instances, extra, families, res.embeddings ? res.embeddings->dim() : 0,
                          res.clusters ? res.clusters->num_classes() : 0);
  VectorizeStats stats;
  auto vectors = vectorize_all(instances, space, res.embeddings_ptr(), res.clusters_ptr(),
                               VectorizeMode::Train, &stats);
  double featurize_s = seconds_since(t0);

  if (!o.dump_vectors.empty()) {
    auto dump = open_output(o.dump_vectors);
    for (const auto& fv : vectors) dump_svmlight(fv, dump);
  }

  auto t1 = std::chrono::steady_clock::now();
  Model model = train_ovr(vectors, space, train_config_from(o));
  double train_s = seconds_since(t1);

  auto out = open_output(o.model);
  save_model(model, out);
  if (stats.truncated)
    std::cerr << "warning: " << stats.truncated << " instance(s) truncated to k=" << space.k
              << "\n";
  std::cout << "instances=" << instances.size() << " k=" << space.k
            << " dim=" << space.total_dim() << " classes=" << space.labels.size()
            << " featurize=" << std::fixed << std::setprecision(2) << featurize_s
            << "s train=" << train_s << "s\n";
  return kExitOk;
}

int cmd_predict(const Options& o) {
  require_set(o.model, "--model");
  require_set(o.abstracts, "--abstracts");
  require_set(o.pairs, "--pairs");
  require_set(o.out, "--out");
  auto min = open_input(o.model);
  Model model = load_model(min);
  Resources res = load_resources(o, model.space.families);
  if (model.space.families.embedding && res.embeddings->dim() != model.space.embed_dim)
    throw DataError("embedding dimension " + std::to_string(res.embeddings->dim()) +
                    " does not match the model (" + std::to_string(model.space.embed_dim) + ")");
  if (model.space.families.cluster && res.clusters->num_classes() > model.space.num_clusters)
    throw DataError("cluster file has more classes than the model was trained with");

  auto ain = open_input(o.abstracts);
  auto docs = parse_abstracts(ain);
  auto pin = open_input(o.pairs);
  auto pairs = parse_entity_pairs(pin);
  auto instances = extract_instances(docs, pairs);

  VectorizeStats stats;
  auto out = open_output(o.out);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    FeatureVector fv = vectorize(instances[i], model.space, res.embeddings_ptr(),
                                 res.clusters_ptr(), VectorizeMode::Predict, &stats);
    out << answer_line(predict(model, fv), pairs[i]) << '\n';
  }
  if (stats.truncated)
    std::cerr << "warning: " << stats.truncated << " instance(s) truncated to k="
              << model.space.k << "\n";
  return kExitOk;
}

int cmd_cv(const Options& o) {
  require_set(o.abstracts, "--abstracts");
  require_set(o.relations, "--relations");
  FamilySet families = families_from(o);
  Resources res = load_resources(o, families);
  auto instances = read_labeled_instances(o);

  CvOptions opts;
  opts.folds = o.folds;
  opts.seed = o.seed;
  opts.transductive = o.transductive == "on";
  CvResult result = cross_validate(instances, train_config_from(o), families,
                                   res.embeddings_ptr(), res.clusters_ptr(), opts);

  std::cout << "features: " << family_set_to_string(families) << "\n";
  std::cout << std::fixed << std::setprecision(4);
  for (std::size_t f = 0; f < result.fold_reports.size(); ++f)
    std::cout << "fold " << f + 1 << " macro-F1 " << result.fold_reports[f].macro_f1 << "\n";
  std::cout << "mean macro-F1 " << result.mean_macro_f1 << "\n";
  std::cout.unsetf(std::ios::fixed);
  std::cout << std::setprecision(10);
  for (std::size_t f = 0; f < result.fold_reports.size(); ++f)
    std::cout << "fold_macro_f1[" << f + 1 << "] = " << result.fold_reports[f].macro_f1 << "\n";
  std::cout << "mean_macro_f1 = " << result.mean_macro_f1 << "\n";
  if (result.truncated_instances)
    std::cerr << "warning: " << result.truncated_instances << " heldout instance(s) truncated\n";
  return kExitOk;
}

int cmd_score(const std::string& gold_path, const std::string& pred_path) {
  auto gin = open_input(gold_path);
  auto gold_rels = parse_relations(gin);
  auto pin = open_input(pred_path);
  auto pred_rels = parse_relations(pin);

  auto label_of = [](const RelationLabel& r) {
    return r.rel_type + (r.reversed ? " REVERSE" : "");
  };
  std::map<std::pair<std::string, std::string>, std::string> pred_by_pair;
  for (const auto& r : pred_rels) pred_by_pair[{r.e1, r.e2}] = label_of(r);

  std::vector<std::string> gold, pred;
  gold.reserve(gold_rels.size());
  for (const auto& r : gold_rels) {
    auto it = pred_by_pair.find({r.e1, r.e2});
    if (it == pred_by_pair.end())
      throw DataError("pair (" + r.e1 + "," + r.e2 + ") is missing from \"" + pred_path + "\"");
    gold.push_back(label_of(r));
    pred.push_back(it->second);
    pred_by_pair.erase(it);
  }
  if (!pred_by_pair.empty()) {
    const auto& [pair, label] = *pred_by_pair.begin();
    throw DataError("pair (" + pair.first + "," + pair.second + ") is missing from \"" +
                    gold_path + "\"");
  }

  EvaluationReport report = score(gold, pred);
  print_report(report, std::cout);
  print_report_kv(report, std::cout);
  return kExitOk;
}

void add_common_options(CLI::App* cmd, Options& o, bool with_solver, bool with_features) {
  cmd->add_option("--config", o.config, "flat key = value config file; flags override it");
  if (with_features) {
    cmd->add_option("--ablate", o.ablate, "feature preset: all, no-shape, no-e2ctx");
    cmd->add_option("--embeddings", o.embeddings, "word2vec text-format embedding file");
    cmd->add_option("--clusters", o.clusters, "tab-separated word cluster file");
    cmd->add_option("--transductive", o.transductive,
                    "on|off: expand vocabulary with test/heldout tokens before training");
  }
  if (with_solver) {
    cmd->add_option("--cost", o.cost, "SVM cost parameter C");
    cmd->add_option("--eps", o.eps, "solver stopping tolerance");
    cmd->add_option("--seed", o.seed, "seed for shuffling and fold assignment");
    cmd->add_flag("--bias", o.bias, "append a constant-1 feature");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relclass: a lightweight relation classifier for annotated abstracts"};
  app.require_subcommand(1);

  Options opt;
  std::string gold_path, pred_path;

  CLI::App* train = app.add_subcommand("train", "train a model from labeled relations");
  train->add_option("--abstracts", opt.abstracts, "annotated abstract file");
  train->add_option("--relations", opt.relations, "gold relation file");
  train->add_option("--model", opt.model, "output model path");
  train->add_option("--test-abstracts", opt.test_abstracts,
                    "test abstracts for transductive vocabulary expansion");
  train->add_option("--test-pairs", opt.test_pairs,
                    "test entity pairs for transductive vocabulary expansion");
  train->add_option("--dump-vectors", opt.dump_vectors,
                    "write training vectors in sparse text form");
  add_common_options(train, opt, /*with_solver=*/true, /*with_features=*/true);

  CLI::App* predict = app.add_subcommand("predict", "label entity pairs with a trained model");
  predict->add_option("--model", opt.model, "model path");
  predict->add_option("--abstracts", opt.abstracts, "annotated abstract file");
  predict->add_option("--pairs", opt.pairs, "entity pairs to label");
  predict->add_option("--out", opt.out, "answer file to write");
  predict->add_option("--embeddings", opt.embeddings, "word2vec text-format embedding file");
  predict->add_option("--clusters", opt.clusters, "tab-separated word cluster file");
  predict->add_option("--config", opt.config, "flat key = value config file");

  CLI::App* cv = app.add_subcommand("cv", "k-fold cross-validation on labeled relations");
  cv->add_option("--abstracts", opt.abstracts, "annotated abstract file");
  cv->add_option("--relations", opt.relations, "gold relation file");
  cv->add_option("--folds", opt.folds, "number of folds");
  add_common_options(cv, opt, /*with_solver=*/true, /*with_features=*/true);

  CLI::App* score_cmd = app.add_subcommand("score", "score an answer file against gold");
  score_cmd->add_option("gold", gold_path, "gold relation file")->required();
  score_cmd->add_option("pred", pred_path, "predicted relation file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    CLI::App* active = train->parsed()     ? train
                       : predict->parsed() ? predict
                       : cv->parsed()      ? cv
                                           : score_cmd;
    if (!opt.config.empty()) apply_config_file(*active, opt);
    validate_numbers(opt);
    if (train->parsed()) return cmd_train(opt);
    if (predict->parsed()) return cmd_predict(opt);
    if (cv->parsed()) return cmd_cv(opt);
    return cmd_score(gold_path, pred_path);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
