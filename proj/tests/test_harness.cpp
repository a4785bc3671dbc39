#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_set>

#include "imblab/harness/config.hpp"
#include "imblab/harness/experiment.hpp"
#include "imblab/harness/report.hpp"
#include "imblab/harness/results_io.hpp"

using namespace imblab;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an imblab::Error");
  return ErrorCode::NoData;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("imblab_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig tiny_config() {
  auto c = parse_config(R"({"learners": ["LR"], "resamplers": ["Original"], "paradigms": ["CC"], "ir_list": [1],
                            "repetitions": 2, "n0_train": 60, "m0_test": 100})");
  return c;
}

ResultRecord record(Paradigm p, ResampleKind r, LearnerKind l, double ir, std::string metric, double mean) {
  return {ExampleId::Example1, p, r, l, ir, std::move(metric), mean, 0.01, 30};
}

}  // namespace

TEST_CASE("empty config yields defaults") {
  for (const char* text : {"", "  \n", "{}"}) {
    const auto c = parse_config(text);
    CHECK(c.ir_list == std::vector<double>{1, 2, 4, 8, 16, 32, 64, 128});
    CHECK(c.n0_train == 300);
    CHECK(c.m0_test == 2000);
    CHECK(c.repetitions == 100);
    CHECK(c.smote.k_neighbors == 5);
    CHECK(c.paradigms.size() == 3);
    CHECK(c.resamplers.size() == 4);
    CHECK(c.learners.size() == 5);
    CHECK(c.cost_rule == CostRule::AutoIr);
    CHECK(c.np_calibration_fraction == 0.5);
    for (const auto& p : c.paradigms) {
      CHECK(p.alpha == 0.05);
      CHECK(p.delta == 0.5);
    }
  }
}

TEST_CASE("config fields parse") {
  const auto c = parse_config(R"({
    "example": 2,
    "paradigms": [{"tag": "CS", "cost0": 3, "cost1": 2}, {"tag": "NP", "alpha": 0.1, "delta": 0.2}],
    "resamplers": ["smote", "Hybrid"],
    "learners": ["RandomForest", "xgb"],
    "ir_list": [1, 2.5],
    "smote": {"k_neighbors": 3, "gap_mode": "PerCoordinate"},
    "hyperparams": {"forest": {"trees": 10}, "svm": {"max_iterations": 500}},
    "master_seed": 18446744073709551615,
    "cost_rule": "Explicit",
    "np_calibration_fraction": 0.4
  })");
  CHECK(c.example == ExampleId::Example2);
  CHECK(c.paradigms[1].alpha == 0.1);
  CHECK(c.resamplers == std::vector{ResampleKind::Smote, ResampleKind::Hybrid});
  CHECK(c.learners == std::vector{LearnerKind::RandomForest, LearnerKind::GradientBoostedTrees});
  CHECK(c.smote.gap_mode == GapMode::PerCoordinate);
  CHECK(c.hyperparams.forest.trees == 10);
  CHECK(c.hyperparams.svm.max_iterations == 500);
  CHECK(c.master_seed == 18446744073709551615ULL);
  CHECK(c.cost_weights(8) == std::pair{3.0, 2.0});
  CHECK(parse_config("{}").cost_weights(8) == std::pair{8.0, 1.0});
}

TEST_CASE("config validation errors") {
  CHECK(code_of([] { parse_config(R"({"ir_list": [1, 0.5]})"); }) == ErrorCode::ValidationError);
  CHECK(code_of([] { parse_config(R"({"repetitions": 0})"); }) == ErrorCode::ValidationError);
  CHECK(code_of([] { parse_config(R"({"learners": []})"); }) == ErrorCode::ValidationError);
  CHECK(code_of([] { parse_config(R"({"paradigms": [{"tag": "NP", "alpha": 1.5}]})"); }) == ErrorCode::ValidationError);
  CHECK(code_of([] { parse_config(R"({"resamplers": ["Under", "Under"]})"); }) == ErrorCode::ValidationError);
  CHECK(code_of([] { parse_config(R"({"learners": ["KNN"]})"); }) == ErrorCode::ValidationError);
  CHECK_THAT(message_of([] { parse_config(R"({"repetitons": 5})"); }), ContainsSubstring("repetitons"));
  CHECK_THAT(message_of([] { parse_config(R"({"hyperparams": {"svm": {"C": 1}}})"); }), ContainsSubstring("hyperparams.svm.C"));
  CHECK(code_of([] { parse_config(R"({"n0_train": "many"})"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_config(R"({"n0_train": -3})"); }) == ErrorCode::ValidationError);
}

TEST_CASE("config syntax errors carry line and column") {
  const auto msg = message_of([] { parse_config("{\n  \"n0_train\": 300,\n  \"m0_test\": ]\n}"); });
  CHECK_THAT(msg, ContainsSubstring("ParseError"));
  CHECK_THAT(msg, ContainsSubstring("line 3"));
  CHECK_THAT(msg, ContainsSubstring("column 14"));
  CHECK(code_of([] { load_config("/nonexistent/imblab.json"); }) == ErrorCode::IoError);
}

TEST_CASE("fast profile") {
  auto c = parse_config("{}");
  apply_fast_profile(c);
  CHECK(c.repetitions == 30);
  CHECK(c.m0_test == 500);
  CHECK(c.ir_list == std::vector<double>{1, 8, 128});
}

TEST_CASE("cell enumeration covers the full matrix") {
  const auto c = parse_config("{}");
  CHECK(enumerate_cells(c).size() == 480);
}

TEST_CASE("cell seeds never collide across the full matrix") {
  auto c = parse_config("{}");
  std::unordered_set<std::uint64_t> seeds;
  std::size_t total = 0;
  for (auto example : {ExampleId::Example1, ExampleId::Example2}) {
    c.example = example;
    for (const auto& cell : enumerate_cells(c)) {
      for (std::size_t rep = 0; rep < c.repetitions; ++rep) {
        seeds.insert(cell_seed(c.master_seed, cell, rep));
        ++total;
      }
    }
  }
  CHECK(total == 96000);
  CHECK(seeds.size() == total);
  CHECK(pack_cell({ExampleId::Example2, Paradigm::NP, ResampleKind::Hybrid, LearnerKind::GradientBoostedTrees, 4095}, 0xffffffffu) <
        (std::uint64_t{1} << 52));
}

TEST_CASE("run_cell is deterministic and uses the configured costs") {
  auto c = parse_config(R"({"n0_train": 80, "m0_test": 200, "ir_list": [1, 8]})");
  const CellKey cc{ExampleId::Example1, Paradigm::CC, ResampleKind::Original, LearnerKind::LogisticRegression, 0};
  const auto a = run_cell(c, cc, 0);
  const auto b = run_cell(c, cc, 0);
  CHECK(a.confusion == b.confusion);
  CHECK(a.roc_auc == b.roc_auc);
  CHECK(run_cell(c, cc, 1).roc_auc != a.roc_auc);

  const CellKey cs{ExampleId::Example1, Paradigm::CS, ResampleKind::Under, LearnerKind::LogisticRegression, 1};
  RepDiagnostics diag;
  const auto r = run_cell(c, cs, 0, &diag);
  CHECK(diag.rule.cutoff == 8.0 / 9.0);
  CHECK_THAT(r.cost, WithinAbs(8.0 * r.pi0_hat * *r.type1 + 1.0 * r.pi1_hat * *r.type2, 1e-12));
  CHECK(r.confusion.class0() == 200);
  CHECK(r.confusion.class1() == 1600);
}

TEST_CASE("NP cell calibrates on held-out class 0") {
  auto c = parse_config(R"({"n0_train": 100, "m0_test": 300, "ir_list": [1], "hyperparams": {"forest": {"trees": 30}}})");
  const CellKey np{ExampleId::Example1, Paradigm::NP, ResampleKind::Under, LearnerKind::RandomForest, 0};
  RepDiagnostics diag;
  const auto r = run_cell(c, np, 0, &diag);
  CHECK(r.type1.has_value());
  CHECK(diag.rule.provenance == ThresholdRule::Provenance::NpOrderStatistic);
  CHECK(diag.rule.np_n == 50u);
  CHECK(diag.rule.np_k == np_order_statistic_rank(50, 0.05, 0.5));

  c.n0_train = 20;  // 10 held-out points cannot meet (1 - alpha)^n <= delta
  CHECK(code_of([&] { run_cell(c, np, 0); }) == ErrorCode::SampleTooSmall);
}

TEST_CASE("aggregation") {
  const auto a = aggregate({0.1, 0.2, 0.3});
  CHECK_THAT(a.mean, WithinAbs(0.2, 1e-15));
  CHECK_THAT(a.std_error, WithinAbs(0.0577350269189626, 1e-12));
  CHECK(aggregate({0.4, 0.4, 0.4}).std_error == 0.0);
  CHECK(aggregate({0.4}).std_error == 0.0);
  CHECK_THAT(aggregate({0.3, 0.1, 0.2}).mean, WithinAbs(0.2, 1e-15));

  MetricsReport with, without;
  with.type1 = 0.2;
  without.type1.reset();
  std::vector<ResultRecord> out;
  append_cell_records(out, {}, 4.0, {with, without, with});
  const auto it = std::find_if(out.begin(), out.end(), [](const auto& r) { return r.metric == "type1"; });
  REQUIRE(it != out.end());
  CHECK(it->rep_count == 2);
  CHECK(std::none_of(out.begin(), out.end(), [](const auto& r) { return r.metric == "type2"; }));
  CHECK(std::find_if(out.begin(), out.end(), [](const auto& r) { return r.metric == "risk"; })->rep_count == 3);
}

TEST_CASE("run_experiment on a single cell") {
  const auto result = run_experiment(tiny_config());
  CHECK(result.records.size() == kMetricNames.size());
  CHECK(result.failures.empty());
  REQUIRE(result.cells.size() == 1);
  CHECK(result.cells[0].completed_reps == 2);
  for (const auto& r : result.records) {
    CHECK(r.rep_count == 2);
    CHECK(r.std_error >= 0.0);
  }
  CHECK(std::is_sorted(result.records.begin(), result.records.end(), record_key_less));
}

TEST_CASE("run_experiment records failures without aborting") {
  auto c = parse_config(R"({"learners": ["LR"], "resamplers": ["Original"], "paradigms": ["CC", "NP"], "ir_list": [1],
                            "repetitions": 2, "n0_train": 20, "m0_test": 50})");
  const auto result = run_experiment(c);
  CHECK(result.failures.size() == 2);
  for (const auto& f : result.failures) CHECK(f.code == ErrorCode::SampleTooSmall);
  CHECK(result.records.size() == kMetricNames.size());
}

TEST_CASE("serial and parallel runs agree exactly") {
  auto c = parse_config(R"({"learners": ["LR", "RF", "SVM"], "resamplers": ["Original", "SMOTE"], "paradigms": ["CC", "NP"],
                            "ir_list": [1, 4], "repetitions": 2, "n0_train": 40, "m0_test": 60,
                            "hyperparams": {"forest": {"trees": 10}}})");
  const auto serial = run_experiment(c, {.threads = 1});
  const auto parallel = run_experiment(c, {.threads = 8});
  CHECK(serial.records == parallel.records);
  std::size_t progress_calls = 0;
  run_experiment(c, {.threads = 3, .progress = [&](std::size_t done, std::size_t total) {
                       ++progress_calls;
                       CHECK(done <= total);
                     }});
  CHECK(progress_calls == enumerate_cells(c).size() * 2);
}

TEST_CASE("results CSV round trip") {
  const auto result = run_experiment(tiny_config());
  const auto path = scratch("results.csv");
  write_results(result.records, path.string());
  CHECK(slurp(path).rfind("example,paradigm,resampler,learner,ir,metric,mean,stderr,rep_count\n", 0) == 0);
  CHECK(read_results(path.string()) == result.records);

  auto shuffled = result.records;
  std::reverse(shuffled.begin(), shuffled.end());
  const auto path2 = scratch("results2.csv");
  write_results(shuffled, path2.string());
  CHECK(slurp(path) == slurp(path2));

  const auto none = scratch("empty.csv");
  CHECK(code_of([&] { write_results({}, none.string()); }) == ErrorCode::EmptyInput);
  CHECK_FALSE(fs::exists(none));
  CHECK(code_of([] { write_results({record(Paradigm::CC, ResampleKind::Under, LearnerKind::Svm, 1, "risk", 0.1)},
                                   "/nonexistent/dir/out.csv"); }) == ErrorCode::IoError);
}

TEST_CASE("results reader rejects malformed files") {
  const auto path = scratch("bad.csv");
  std::ofstream(path) << "example,paradigm,resampler,learner,ir,metric,mean,stderr,rep_count\nExample1,CC,Under,LR,1,risk,0.1,0.01\n";
  CHECK(code_of([&] { read_results(path.string()); }) == ErrorCode::ParseError);
  std::ofstream(path) << "example,paradigm,resampler,learner,ir,metric,mean,stderr,rep_count\nExample1,CC,Under,KNN,1,risk,0.1,0.01,3\n";
  CHECK(code_of([&] { read_results(path.string()); }) == ErrorCode::ParseError);
  std::ofstream(path) << "a,b\n";
  CHECK(code_of([&] { read_results(path.string()); }) == ErrorCode::ParseError);
}

TEST_CASE("report covers every paradigm and metric") {
  std::vector<ResultRecord> records;
  const auto c = parse_config("{}");
  for (const auto& cell : enumerate_cells(c)) {
    for (auto m : kMetricNames) {
      const double v = 0.01 * static_cast<double>(cell.ir_index + 1) + 0.001 * static_cast<double>(cell.learner) +
                       0.0001 * static_cast<double>(cell.resampler);
      records.push_back({cell.example, cell.paradigm, cell.resampler, cell.learner, c.ir_list[cell.ir_index], std::string(m), v, 0.001, 100});
    }
  }
  const auto dir = scratch("report");
  const auto files = render_report(records, dir);
  CHECK(files.size() == 3 * kMetricNames.size() * 2 + 1);
  std::set<std::string> paradigms;
  for (const auto& f : files) {
    if (f.extension() == ".svg") paradigms.insert(f.stem().string().substr(9, 2));
  }
  CHECK(paradigms == std::set<std::string>{"CC", "CS", "NP"});
  const auto svg = slurp(dir / "Example1_CC_risk.svg");
  CHECK_THAT(svg, ContainsSubstring("<svg"));
  CHECK_THAT(svg, ContainsSubstring("log2(IR)"));
  std::size_t polylines = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++polylines;
  CHECK(polylines == 20);  // 5 learner panels x 4 resamplers

  // Lowest value is Original (0) with LR (0); highest is Hybrid (3) with XGB (4).
  const auto best = slurp(dir / "best_combinations.csv");
  CHECK_THAT(best, ContainsSubstring("Example1,CC,risk,min,1,Original,LR,"));
  CHECK_THAT(best, ContainsSubstring("Example1,CC,f1,max,1,Hybrid,XGB,"));
  CHECK_THAT(best, ContainsSubstring("Example1,NP,cost,min,128,Original,LR,"));
}

TEST_CASE("report degenerate inputs") {
  const auto dir = scratch("report_single");
  const auto files = render_report({record(Paradigm::NP, ResampleKind::Under, LearnerKind::Svm, 8, "type1", 0.04)}, dir);
  CHECK(files.size() == 3);
  const auto svg = slurp(dir / "Example1_NP_type1.svg");
  CHECK_THAT(svg, ContainsSubstring("</svg>"));
  CHECK(svg.find("nan") == std::string::npos);
  CHECK(code_of([&] { render_report({}, dir); }) == ErrorCode::NoData);
  const auto file = scratch("not_a_dir");
  std::ofstream(file) << "x";
  CHECK(code_of([&] { render_report({record(Paradigm::CC, ResampleKind::Under, LearnerKind::Svm, 1, "risk", 0.1)}, file); }) ==
        ErrorCode::IoError);
}

TEST_CASE("shipped sample configurations load and validate") {
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(IMBLAB_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path().string()));
    ++seen;
  }
  CHECK(seen >= 1);
  const auto defaults = load_config(std::string(IMBLAB_CONFIG_DIR) + "/default.json");
  const auto blank = parse_config("");
  CHECK(defaults.ir_list == blank.ir_list);
  CHECK(defaults.repetitions == blank.repetitions);
  CHECK(defaults.master_seed == blank.master_seed);
  CHECK(defaults.learners == blank.learners);
}

TEST_CASE("neural network restart settings are configurable and validated") {
  const auto config = parse_config(R"({"hyperparams": {"neural_net": {"restarts": 2, "hidden_bias_init": 0.0}}})");
  CHECK(config.hyperparams.neural_net.restarts == 2);
  CHECK(config.hyperparams.neural_net.hidden_bias_init == 0.0);
  CHECK_THROWS_AS(parse_config(R"({"hyperparams": {"neural_net": {"restarts": 0}}})"), Error);
}
