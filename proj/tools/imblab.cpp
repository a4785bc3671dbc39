// imblab command-line front end: generate, run, report.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>

#include "imblab/datagen.hpp"
#include "imblab/harness/config.hpp"
#include "imblab/harness/experiment.hpp"
#include "imblab/harness/report.hpp"
#include "imblab/harness/results_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int exit_code_for(imblab::ErrorCode code) {
  using imblab::ErrorCode;
  switch (code) {
    case ErrorCode::ValidationError:
    case ErrorCode::ParseError:
    case ErrorCode::InvalidRatio:
    case ErrorCode::InvalidArgument: return kExitValidation;
    default: return kExitRuntime;
  }
}

std::optional<std::uint64_t> seed_from_env() {
  const char* text = std::getenv("IMBLAB_SEED");
  if (text == nullptr || *text == '\0') return std::nullopt;
  std::uint64_t value = 0;
  const std::string_view s(text);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    imblab::fail(imblab::ErrorCode::ValidationError, "IMBLAB_SEED must be an unsigned integer, got '" + std::string(s) + "'");
  }
  return value;
}

int cmd_generate(int example, double ir, std::size_t n0, std::optional<std::uint64_t> seed, const std::string& out) {
  if (example != 1 && example != 2) imblab::fail(imblab::ErrorCode::ValidationError, "--example must be 1 or 2");
  if (auto env = seed_from_env()) seed = env;
  imblab::Rng rng(seed.value_or(0));
  const auto id = example == 1 ? imblab::ExampleId::Example1 : imblab::ExampleId::Example2;
  const auto ds = imblab::make_dataset(id, ir, n0, rng);
  imblab::write_dataset_csv(ds, out);
  std::cerr << "wrote " << ds.size() << " rows (n0=" << ds.count(0) << ", n1=" << ds.count(1) << ") to " << out << "\n";
  return kExitOk;
}

void write_timings(const imblab::ExperimentResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) imblab::fail(imblab::ErrorCode::IoError, "cannot write " + path);
  out << "paradigm,resampler,learner,ir,completed_reps,failed_reps,k_clamped_reps,clamped_scores,seconds\n";
  for (const auto& c : result.cells) {
    out << imblab::to_string(c.cell.paradigm) << ',' << imblab::to_string(c.cell.resampler) << ',' << imblab::to_string(c.cell.learner)
        << ',' << imblab::detail::format_double(c.ir) << ',' << c.completed_reps << ',' << c.failed_reps << ',' << c.k_clamped_reps
        << ',' << c.clamped_scores << ',' << imblab::detail::format_double(c.seconds) << '\n';
  }
}

int cmd_run(const std::string& config_path, const std::string& out, bool fast, std::size_t threads, const std::string& timings,
            bool quiet) {
  auto config = imblab::load_config(config_path);
  if (fast) imblab::apply_fast_profile(config);
  if (auto env = seed_from_env()) config.master_seed = *env;
  config.validate();

  imblab::RunOptions options;
  options.threads = threads;
  const auto start = std::chrono::steady_clock::now();
  std::size_t last_decile = 0;
  if (!quiet) {
    options.progress = [&](std::size_t done, std::size_t total) {
      const std::size_t decile = done * 10 / total;
      if (decile != last_decile) {
        last_decile = decile;
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cerr << "  " << done << "/" << total << " reps (" << decile * 10 << "%), " << static_cast<long>(s) << " s\n";
      }
    };
  }
  const auto result = imblab::run_experiment(config, options);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (result.records.empty()) imblab::fail(imblab::ErrorCode::NoData, "every repetition failed; no results to write");
  imblab::write_results(result.records, out);
  if (!timings.empty()) write_timings(result, timings);

  std::size_t clamped_cells = 0, clamped_scores = 0;
  for (const auto& c : result.cells) {
    clamped_cells += c.k_clamped_reps > 0 ? 1 : 0;
    clamped_scores += c.clamped_scores;
  }
  std::cerr << "cells: " << result.cells.size() << ", records: " << result.records.size() << ", failed reps: " << result.failures.size()
            << ", cells with SMOTE k clamped: " << clamped_cells << ", clamped scores: " << clamped_scores << ", wall time: " << seconds
            << " s\n";
  std::map<std::string, std::size_t> failure_counts;
  for (const auto& f : result.failures) {
    failure_counts[f.code ? std::string(imblab::to_string(*f.code)) : std::string("Exception")]++;
  }
  for (const auto& [code, n] : failure_counts) std::cerr << "  failures " << code << ": " << n << "\n";
  for (std::size_t i = 0; i < std::min<std::size_t>(result.failures.size(), 5); ++i) {
    const auto& f = result.failures[i];
    std::cerr << "  e.g. " << imblab::to_string(f.cell.paradigm) << '/' << imblab::to_string(f.cell.resampler) << '/'
              << imblab::to_string(f.cell.learner) << " ir=" << f.ir << " rep=" << f.rep << ": " << f.message << "\n";
  }
  return kExitOk;
}

int cmd_report(const std::string& results, const std::string& out_dir) {
  const auto records = imblab::read_results(results);
  const auto files = imblab::render_report(records, out_dir);
  std::cerr << "wrote " << files.size() << " files to " << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation benchmark for imbalanced binary classification"};
  app.require_subcommand(1);

  auto* generate = app.add_subcommand("generate", "Draw a labeled dataset and write it as CSV");
  int example = 1;
  double ir = 1.0;
  std::size_t n0 = 300;
  std::optional<std::uint64_t> seed;
  std::string data_out;
  generate->add_option("--example", example, "Data-generating example (1 or 2)")->required();
  generate->add_option("--ir", ir, "Imbalance ratio n1/n0 (>= 1)")->required();
  generate->add_option("--n0", n0, "Minority (class 0) size")->required();
  generate->add_option("--seed", seed, "RNG seed (IMBLAB_SEED overrides)");
  generate->add_option("--out", data_out, "Output CSV path")->required();

  auto* run = app.add_subcommand("run", "Run the experiment matrix and write aggregated results");
  std::string config_path, results_out, timings;
  bool fast = false, quiet = false;
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  run->add_option("--config", config_path, "JSON configuration file")->required();
  run->add_option("--out", results_out, "Results CSV path")->required();
  run->add_flag("--fast", fast, "CI profile: 30 reps, m0=500, IR in {1, 8, 128}");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--timings", timings, "Optional per-cell timing CSV");
  run->add_flag("--quiet", quiet, "Suppress progress output");

  auto* report = app.add_subcommand("report", "Render figures and best-combination tables");
  std::string results_in, out_dir;
  report->add_option("--results", results_in, "Results CSV from `run`")->required();
  report->add_option("--out-dir", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*generate) return cmd_generate(example, ir, n0, seed, data_out);
    if (*run) return cmd_run(config_path, results_out, fast, threads, timings, quiet);
    if (*report) return cmd_report(results_in, out_dir);
  } catch (const imblab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
