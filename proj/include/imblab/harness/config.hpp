#pragma once

// Experiment configuration: a JSON document, every field optional, unknown
// fields rejected.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "imblab/datagen.hpp"
#include "imblab/learners.hpp"
#include "imblab/paradigms.hpp"
#include "imblab/resample.hpp"

namespace imblab {

enum class CostRule {
  AutoIr,    // C0 = IR, C1 = 1
  Explicit,  // costs from the CS paradigm entry
};

struct ExperimentConfig {
  ExampleId example = ExampleId::Example1;
  std::vector<ParadigmSpec> paradigms = {{Paradigm::CC}, {Paradigm::CS}, {Paradigm::NP}};
  std::vector<ResampleKind> resamplers = {ResampleKind::Original, ResampleKind::Under, ResampleKind::Smote, ResampleKind::Hybrid};
  std::vector<LearnerKind> learners = {LearnerKind::LogisticRegression, LearnerKind::NeuralNet, LearnerKind::RandomForest,
                                       LearnerKind::Svm, LearnerKind::GradientBoostedTrees};
  std::vector<double> ir_list = {1, 2, 4, 8, 16, 32, 64, 128};
  std::size_t n0_train = 300;
  std::size_t m0_test = 2000;
  std::size_t repetitions = 100;
  SmoteParams smote;
  Hyperparams hyperparams;
  std::uint64_t master_seed = 20200101;
  CostRule cost_rule = CostRule::AutoIr;
  double np_calibration_fraction = 0.5;  // share of training class 0 held out for NP calibration

  /// Throws ValidationError naming the first violated invariant.
  void validate() const {
    auto bad = [](const std::string& what) { fail(ErrorCode::ValidationError, what); };
    if (paradigms.empty()) bad("paradigms must be non-empty");
    if (resamplers.empty()) bad("resamplers must be non-empty");
    if (learners.empty()) bad("learners must be non-empty");
    if (ir_list.empty()) bad("ir_list must be non-empty");
    if (ir_list.size() > 4096) bad("ir_list may hold at most 4096 values");
    for (double ir : ir_list) {
      if (!(ir >= 1.0) || !std::isfinite(ir)) bad("ir_list values must be >= 1 (got " + detail::format_double(ir) + ")");
    }
    if (std::set<double>(ir_list.begin(), ir_list.end()).size() != ir_list.size()) bad("ir_list values must be distinct");
    std::set<Paradigm> tags;
    for (const auto& p : paradigms) {
      p.validate();
      if (!tags.insert(p.tag).second) bad("paradigm " + std::string(to_string(p.tag)) + " listed twice");
    }
    if (std::set<ResampleKind>(resamplers.begin(), resamplers.end()).size() != resamplers.size()) bad("resamplers must be distinct");
    if (std::set<LearnerKind>(learners.begin(), learners.end()).size() != learners.size()) bad("learners must be distinct");
    if (n0_train < 1) bad("n0_train must be >= 1");
    if (m0_test < 1) bad("m0_test must be >= 1");
    if (repetitions < 1) bad("repetitions must be >= 1");
    if (repetitions >= (std::size_t{1} << 32)) bad("repetitions must be < 2^32");
    if (smote.k_neighbors < 1) bad("smote.k_neighbors must be >= 1");
    if (!(np_calibration_fraction > 0.0 && np_calibration_fraction < 1.0)) bad("np_calibration_fraction must lie in (0,1)");
    const auto& hp = hyperparams;
    if (hp.logistic.max_iterations < 1 || !(hp.logistic.tolerance > 0.0) || !(hp.logistic.ridge >= 0.0)) bad("hyperparams.logistic out of range");
    if (hp.neural_net.hidden_units < 1 || hp.neural_net.epochs < 1 || !(hp.neural_net.learning_rate > 0.0) ||
        !(hp.neural_net.init_range > 0.0) || !(hp.neural_net.epsilon > 0.0) ||
        !std::isfinite(hp.neural_net.hidden_bias_init) || hp.neural_net.restarts < 1 || hp.neural_net.restarts > 100) {
      bad("hyperparams.neural_net out of range");
    }
    if (hp.forest.trees < 1 || hp.forest.min_node_size < 1 || hp.forest.features_per_split < 0) bad("hyperparams.forest out of range");
    if (!(hp.svm.cost > 0.0) || !(hp.svm.gamma >= 0.0) || !(hp.svm.tolerance > 0.0) || hp.svm.max_iterations < 1 ||
        !(hp.svm.cache_megabytes > 0.0)) {
      bad("hyperparams.svm out of range");
    }
    if (hp.boosting.rounds < 1 || hp.boosting.max_depth < 1 || !(hp.boosting.learning_rate > 0.0) || !(hp.boosting.lambda >= 0.0) ||
        !(hp.boosting.min_child_weight >= 0.0)) {
      bad("hyperparams.boosting out of range");
    }
  }

  /// (C0, C1) used for the cost metric and for the CS threshold at a given IR.
  std::pair<double, double> cost_weights(double ir) const {
    if (cost_rule == CostRule::AutoIr) return {ir, 1.0};
    for (const auto& p : paradigms) {
      if (p.tag == Paradigm::CS) return {p.cost0, p.cost1};
    }
    return {1.0, 1.0};
  }
};

/// CI profile: 30 repetitions, m0 = 500, IR in {1, 8, 128}.
inline void apply_fast_profile(ExperimentConfig& config) {
  config.repetitions = 30;
  config.m0_test = 500;
  config.ir_list = {1, 8, 128};
}

namespace detail {

inline std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

class ConfigReader {
 public:
  using json = nlohmann::json;

  static void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(ErrorCode::ParseError, field(path) + "expected an object");
    for (const auto& [key, value] : obj.items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        fail(ErrorCode::ValidationError, "unknown field '" + join(path, key) + "'");
      }
    }
  }

  static std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
  static std::string field(const std::string& path) { return "field '" + (path.empty() ? std::string("<root>") : path) + "': "; }

  static double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(ErrorCode::ParseError, field(path) + "expected a number");
    return v.get<double>();
  }

  static long long integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(ErrorCode::ParseError, field(path) + "expected an integer");
    if (v.is_number_unsigned()) {
      const auto u = v.get<unsigned long long>();
      if (u > static_cast<unsigned long long>(std::numeric_limits<long long>::max())) return std::numeric_limits<long long>::max();
    }
    return v.get<long long>();
  }

  static std::size_t count(const json& v, const std::string& path) {
    const long long x = integer(v, path);
    if (x < 0) fail(ErrorCode::ValidationError, field(path) + "must be non-negative");
    return static_cast<std::size_t>(x);
  }

  static std::string text(const json& v, const std::string& path) {
    if (!v.is_string()) fail(ErrorCode::ParseError, field(path) + "expected a string");
    return v.get<std::string>();
  }

  static const json& array(const json& v, const std::string& path) {
    if (!v.is_array()) fail(ErrorCode::ParseError, field(path) + "expected an array");
    return v;
  }

  static ExampleId example(const json& v, const std::string& path) {
    if (v.is_number_integer()) {
      const auto k = v.get<long long>();
      if (k == 1) return ExampleId::Example1;
      if (k == 2) return ExampleId::Example2;
    } else if (v.is_string()) {
      const auto s = lowercase(v.get<std::string>());
      if (s == "example1" || s == "1") return ExampleId::Example1;
      if (s == "example2" || s == "2") return ExampleId::Example2;
    }
    fail(ErrorCode::ValidationError, field(path) + "example must be 1, 2, \"Example1\" or \"Example2\"");
  }

  static Paradigm paradigm_tag(const std::string& s, const std::string& path) {
    const auto l = lowercase(s);
    if (l == "cc") return Paradigm::CC;
    if (l == "cs") return Paradigm::CS;
    if (l == "np") return Paradigm::NP;
    fail(ErrorCode::ValidationError, field(path) + "unknown paradigm '" + s + "'");
  }

  static ParadigmSpec paradigm(const json& v, const std::string& path) {
    ParadigmSpec spec;
    if (v.is_string()) {
      spec.tag = paradigm_tag(v.get<std::string>(), path);
      return spec;
    }
    reject_unknown(v, path, {"tag", "cost0", "cost1", "alpha", "delta"});
    if (!v.contains("tag")) fail(ErrorCode::ValidationError, field(path) + "missing 'tag'");
    spec.tag = paradigm_tag(text(v["tag"], join(path, "tag")), join(path, "tag"));
    if (v.contains("cost0")) spec.cost0 = number(v["cost0"], join(path, "cost0"));
    if (v.contains("cost1")) spec.cost1 = number(v["cost1"], join(path, "cost1"));
    if (v.contains("alpha")) spec.alpha = number(v["alpha"], join(path, "alpha"));
    if (v.contains("delta")) spec.delta = number(v["delta"], join(path, "delta"));
    return spec;
  }

  static ResampleKind resampler(const json& v, const std::string& path) {
    const auto s = lowercase(text(v, path));
    if (s == "original") return ResampleKind::Original;
    if (s == "under") return ResampleKind::Under;
    if (s == "smote") return ResampleKind::Smote;
    if (s == "hybrid") return ResampleKind::Hybrid;
    fail(ErrorCode::ValidationError, field(path) + "unknown resampler '" + v.get<std::string>() + "'");
  }

  static LearnerKind learner(const json& v, const std::string& path) {
    const auto s = lowercase(text(v, path));
    if (s == "lr" || s == "logisticregression") return LearnerKind::LogisticRegression;
    if (s == "nn" || s == "neuralnet") return LearnerKind::NeuralNet;
    if (s == "rf" || s == "randomforest") return LearnerKind::RandomForest;
    if (s == "svm") return LearnerKind::Svm;
    if (s == "xgb" || s == "gradientboostedtrees") return LearnerKind::GradientBoostedTrees;
    fail(ErrorCode::ValidationError, field(path) + "unknown learner '" + v.get<std::string>() + "'");
  }

  static void hyperparams(const json& v, Hyperparams& hp) {
    const std::string root = "hyperparams";
    reject_unknown(v, root, {"logistic", "neural_net", "forest", "svm", "boosting"});
    if (v.contains("logistic")) {
      const auto& o = v["logistic"];
      const std::string p = join(root, "logistic");
      reject_unknown(o, p, {"max_iterations", "tolerance", "ridge"});
      if (o.contains("max_iterations")) hp.logistic.max_iterations = static_cast<int>(integer(o["max_iterations"], join(p, "max_iterations")));
      if (o.contains("tolerance")) hp.logistic.tolerance = number(o["tolerance"], join(p, "tolerance"));
      if (o.contains("ridge")) hp.logistic.ridge = number(o["ridge"], join(p, "ridge"));
    }
    if (v.contains("neural_net")) {
      const auto& o = v["neural_net"];
      const std::string p = join(root, "neural_net");
      reject_unknown(o, p, {"hidden_units", "epochs", "learning_rate", "beta1", "beta2", "epsilon", "init_range", "hidden_bias_init", "restarts"});
      if (o.contains("hidden_units")) hp.neural_net.hidden_units = static_cast<int>(integer(o["hidden_units"], join(p, "hidden_units")));
      if (o.contains("epochs")) hp.neural_net.epochs = static_cast<int>(integer(o["epochs"], join(p, "epochs")));
      if (o.contains("learning_rate")) hp.neural_net.learning_rate = number(o["learning_rate"], join(p, "learning_rate"));
      if (o.contains("beta1")) hp.neural_net.beta1 = number(o["beta1"], join(p, "beta1"));
      if (o.contains("beta2")) hp.neural_net.beta2 = number(o["beta2"], join(p, "beta2"));
      if (o.contains("epsilon")) hp.neural_net.epsilon = number(o["epsilon"], join(p, "epsilon"));
      if (o.contains("init_range")) hp.neural_net.init_range = number(o["init_range"], join(p, "init_range"));
      if (o.contains("hidden_bias_init")) hp.neural_net.hidden_bias_init = number(o["hidden_bias_init"], join(p, "hidden_bias_init"));
      if (o.contains("restarts")) hp.neural_net.restarts = static_cast<int>(integer(o["restarts"], join(p, "restarts")));
    }
    if (v.contains("forest")) {
      const auto& o = v["forest"];
      const std::string p = join(root, "forest");
      reject_unknown(o, p, {"trees", "features_per_split", "min_node_size"});
      if (o.contains("trees")) hp.forest.trees = static_cast<int>(integer(o["trees"], join(p, "trees")));
      if (o.contains("features_per_split")) hp.forest.features_per_split = static_cast<int>(integer(o["features_per_split"], join(p, "features_per_split")));
      if (o.contains("min_node_size")) hp.forest.min_node_size = static_cast<int>(integer(o["min_node_size"], join(p, "min_node_size")));
    }
    if (v.contains("svm")) {
      const auto& o = v["svm"];
      const std::string p = join(root, "svm");
      reject_unknown(o, p, {"cost", "gamma", "tolerance", "max_iterations", "cache_megabytes"});
      if (o.contains("cost")) hp.svm.cost = number(o["cost"], join(p, "cost"));
      if (o.contains("gamma")) hp.svm.gamma = number(o["gamma"], join(p, "gamma"));
      if (o.contains("tolerance")) hp.svm.tolerance = number(o["tolerance"], join(p, "tolerance"));
      if (o.contains("max_iterations")) hp.svm.max_iterations = static_cast<long>(integer(o["max_iterations"], join(p, "max_iterations")));
      if (o.contains("cache_megabytes")) hp.svm.cache_megabytes = number(o["cache_megabytes"], join(p, "cache_megabytes"));
    }
    if (v.contains("boosting")) {
      const auto& o = v["boosting"];
      const std::string p = join(root, "boosting");
      reject_unknown(o, p, {"rounds", "max_depth", "learning_rate", "lambda", "min_child_weight"});
      if (o.contains("rounds")) hp.boosting.rounds = static_cast<int>(integer(o["rounds"], join(p, "rounds")));
      if (o.contains("max_depth")) hp.boosting.max_depth = static_cast<int>(integer(o["max_depth"], join(p, "max_depth")));
      if (o.contains("learning_rate")) hp.boosting.learning_rate = number(o["learning_rate"], join(p, "learning_rate"));
      if (o.contains("lambda")) hp.boosting.lambda = number(o["lambda"], join(p, "lambda"));
      if (o.contains("min_child_weight")) hp.boosting.min_child_weight = number(o["min_child_weight"], join(p, "min_child_weight"));
    }
  }
};

}  // namespace detail

/// Parses and validates a configuration document. Blank text yields the
/// defaults. Syntax errors report line and column.
inline ExperimentConfig parse_config(const std::string& text) {
  using json = nlohmann::json;
  using R = detail::ConfigReader;
  ExperimentConfig config;
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
    config.validate();
    return config;
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
    const std::size_t line_start = text.rfind('\n', offset == 0 ? 0 : offset - 1);
    const std::size_t column = offset - (line_start == std::string::npos ? 0 : line_start + 1) + 1;
    fail(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + e.what());
  }
  R::reject_unknown(doc, "", {"example", "paradigms", "resamplers", "learners", "ir_list", "n0_train", "m0_test", "repetitions",
                              "smote", "hyperparams", "master_seed", "cost_rule", "np_calibration_fraction"});
  if (doc.contains("example")) config.example = R::example(doc["example"], "example");
  if (doc.contains("paradigms")) {
    config.paradigms.clear();
    const auto& arr = R::array(doc["paradigms"], "paradigms");
    for (std::size_t i = 0; i < arr.size(); ++i) config.paradigms.push_back(R::paradigm(arr[i], "paradigms[" + std::to_string(i) + "]"));
  }
  if (doc.contains("resamplers")) {
    config.resamplers.clear();
    const auto& arr = R::array(doc["resamplers"], "resamplers");
    for (std::size_t i = 0; i < arr.size(); ++i) config.resamplers.push_back(R::resampler(arr[i], "resamplers[" + std::to_string(i) + "]"));
  }
  if (doc.contains("learners")) {
    config.learners.clear();
    const auto& arr = R::array(doc["learners"], "learners");
    for (std::size_t i = 0; i < arr.size(); ++i) config.learners.push_back(R::learner(arr[i], "learners[" + std::to_string(i) + "]"));
  }
  if (doc.contains("ir_list")) {
    config.ir_list.clear();
    const auto& arr = R::array(doc["ir_list"], "ir_list");
    for (std::size_t i = 0; i < arr.size(); ++i) config.ir_list.push_back(R::number(arr[i], "ir_list[" + std::to_string(i) + "]"));
  }
  if (doc.contains("n0_train")) config.n0_train = R::count(doc["n0_train"], "n0_train");
  if (doc.contains("m0_test")) config.m0_test = R::count(doc["m0_test"], "m0_test");
  if (doc.contains("repetitions")) config.repetitions = R::count(doc["repetitions"], "repetitions");
  if (doc.contains("smote")) {
    const auto& o = doc["smote"];
    R::reject_unknown(o, "smote", {"k_neighbors", "gap_mode"});
    if (o.contains("k_neighbors")) config.smote.k_neighbors = R::count(o["k_neighbors"], "smote.k_neighbors");
    if (o.contains("gap_mode")) {
      const auto mode = detail::lowercase(R::text(o["gap_mode"], "smote.gap_mode"));
      if (mode == "scalarperpoint") {
        config.smote.gap_mode = GapMode::ScalarPerPoint;
      } else if (mode == "percoordinate") {
        config.smote.gap_mode = GapMode::PerCoordinate;
      } else {
        fail(ErrorCode::ValidationError, "field 'smote.gap_mode': expected ScalarPerPoint or PerCoordinate");
      }
    }
  }
  if (doc.contains("hyperparams")) R::hyperparams(doc["hyperparams"], config.hyperparams);
  if (doc.contains("master_seed")) {
    const auto& v = doc["master_seed"];
    if (v.is_number_unsigned()) {
      config.master_seed = v.get<std::uint64_t>();
    } else {
      config.master_seed = static_cast<std::uint64_t>(R::integer(v, "master_seed"));
    }
  }
  if (doc.contains("cost_rule")) {
    const auto rule = detail::lowercase(R::text(doc["cost_rule"], "cost_rule"));
    if (rule == "autoir") {
      config.cost_rule = CostRule::AutoIr;
    } else if (rule == "explicit") {
      config.cost_rule = CostRule::Explicit;
    } else {
      fail(ErrorCode::ValidationError, "field 'cost_rule': expected AutoIr or Explicit");
    }
  }
  if (doc.contains("np_calibration_fraction")) config.np_calibration_fraction = R::number(doc["np_calibration_fraction"], "np_calibration_fraction");
  config.validate();
  return config;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace imblab
