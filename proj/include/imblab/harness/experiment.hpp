#pragma once

// Experiment matrix: paradigm x resampler x learner x IR x repetition.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "imblab/harness/config.hpp"
#include "imblab/metrics.hpp"

namespace imblab {

struct CellKey {
  ExampleId example = ExampleId::Example1;
  Paradigm paradigm = Paradigm::CC;
  ResampleKind resampler = ResampleKind::Original;
  LearnerKind learner = LearnerKind::LogisticRegression;
  std::size_t ir_index = 0;

  bool operator==(const CellKey&) const = default;
};

/// Packs the cell coordinates and repetition into disjoint bit fields
/// (1 + 2 + 2 + 3 + 12 + 32 bits). Injective for ir_index < 4096 and
/// rep < 2^32, which ExperimentConfig::validate enforces.
constexpr std::uint64_t pack_cell(const CellKey& key, std::size_t rep) {
  std::uint64_t v = static_cast<std::uint64_t>(key.example);
  v = (v << 2) | static_cast<std::uint64_t>(key.paradigm);
  v = (v << 2) | static_cast<std::uint64_t>(key.resampler);
  v = (v << 3) | static_cast<std::uint64_t>(key.learner);
  v = (v << 12) | static_cast<std::uint64_t>(key.ir_index & 0xfffu);
  v = (v << 32) | static_cast<std::uint64_t>(rep & 0xffffffffu);
  return v;
}

/// Composition of bijections on 64-bit words, so distinct (cell, rep) pairs
/// never share a seed under one master seed.
constexpr std::uint64_t cell_seed(std::uint64_t master_seed, const CellKey& key, std::size_t rep) {
  return splitmix64(master_seed ^ splitmix64(pack_cell(key, rep)));
}

struct RepDiagnostics {
  ResampleNotes resample_notes;
  std::size_t clamped_scores = 0;
  ThresholdRule rule;
};

namespace detail {

inline const ParadigmSpec& paradigm_spec(const ExperimentConfig& config, Paradigm tag) {
  for (const auto& p : config.paradigms) {
    if (p.tag == tag) return p;
  }
  fail(ErrorCode::ValidationError, "paradigm " + std::string(to_string(tag)) + " not configured");
}

}  // namespace detail

/// One repetition of one cell. Train and test sets are drawn fresh from the
/// cell seed; the test set keeps the training IR with m0 minority rows.
/// The cost metric uses config.cost_weights(ir) under every paradigm.
inline MetricsReport run_cell(const ExperimentConfig& config, const CellKey& key, std::size_t rep,
                              RepDiagnostics* diagnostics = nullptr) {
  if (key.ir_index >= config.ir_list.size()) fail(ErrorCode::InvalidArgument, "run_cell: ir_index out of range");
  const double ir = config.ir_list[key.ir_index];
  const ParadigmSpec& spec = detail::paradigm_spec(config, key.paradigm);
  const auto [c0, c1] = config.cost_weights(ir);

  Rng root(cell_seed(config.master_seed, key, rep));
  Rng data_rng = root.split();
  Rng resample_rng = root.split();
  Rng split_rng = root.split();
  Hyperparams hp = config.hyperparams;
  hp.seed = root();

  const LabeledDataset train = make_dataset(key.example, ir, config.n0_train, data_rng);
  const LabeledDataset test = make_dataset(key.example, ir, config.m0_test, data_rng);

  RepDiagnostics local;
  RepDiagnostics& diag = diagnostics != nullptr ? *diagnostics : local;

  std::optional<ScoringModel> model;
  if (key.paradigm == Paradigm::NP) {
    auto class0 = train.rows_of(0);
    split_rng.shuffle(class0);
    const auto holdout = static_cast<std::size_t>(std::llround(config.np_calibration_fraction * static_cast<double>(class0.size())));
    if (holdout == 0 || holdout >= class0.size()) {
      fail(ErrorCode::SampleTooSmall, "NP split leaves an empty part of class 0 (n0=" + std::to_string(class0.size()) + ")");
    }
    std::vector<std::size_t> calibration(class0.begin(), class0.begin() + static_cast<std::ptrdiff_t>(holdout));
    std::vector<std::size_t> fit_rows(class0.begin() + static_cast<std::ptrdiff_t>(holdout), class0.end());
    std::sort(fit_rows.begin(), fit_rows.end());
    const auto class1 = train.rows_of(1);
    fit_rows.insert(fit_rows.end(), class1.begin(), class1.end());
    const LabeledDataset fit_set = resample(key.resampler, train.subset(fit_rows), config.smote, resample_rng, &diag.resample_notes);
    model.emplace(fit(key.learner, fit_set, hp));
    std::sort(calibration.begin(), calibration.end());
    const LabeledDataset held = train.subset(calibration);
    diag.rule = np_calibrate(*model, held.features(), spec.alpha, spec.delta);
  } else {
    const LabeledDataset fit_set = resample(key.resampler, train, config.smote, resample_rng, &diag.resample_notes);
    model.emplace(fit(key.learner, fit_set, hp));
    ParadigmSpec threshold_spec = spec;
    if (spec.tag == Paradigm::CS) {
      threshold_spec.cost0 = c0;
      threshold_spec.cost1 = c1;
    }
    diag.rule = fixed_threshold(threshold_spec);
  }
  const auto scores = model->score(test.features(), &diag.clamped_scores);
  return full_report(scores, diag.rule, test.labels(), c0, c1);
}

struct ResultRecord {
  ExampleId example = ExampleId::Example1;
  Paradigm paradigm = Paradigm::CC;
  ResampleKind resampler = ResampleKind::Original;
  LearnerKind learner = LearnerKind::LogisticRegression;
  double ir = 1.0;
  std::string metric;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t rep_count = 0;

  bool operator==(const ResultRecord&) const = default;
};

/// Row order of results files: example, paradigm, resampler, learner, IR,
/// metric, each compared by its printed name except IR (numeric).
inline bool record_key_less(const ResultRecord& a, const ResultRecord& b) {
  return std::make_tuple(to_string(a.example), to_string(a.paradigm), to_string(a.resampler), to_string(a.learner), a.ir,
                         std::string_view(a.metric)) < std::make_tuple(to_string(b.example), to_string(b.paradigm),
                                                                       to_string(b.resampler), to_string(b.learner), b.ir,
                                                                       std::string_view(b.metric));
}

struct Aggregate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

/// Mean and sample-sd / sqrt(n); stderr is 0 for a single value. Sums run
/// over deviations from the first value, so constant input gives exactly
/// that value and a zero stderr.
inline Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  a.count = values.size();
  if (values.empty()) return a;
  const double shift = values.front();
  double sum = 0.0;
  for (double v : values) sum += v - shift;
  const double offset = sum / static_cast<double>(values.size());
  a.mean = shift + offset;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - shift - offset) * (v - shift - offset);
    a.std_error = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  }
  return a;
}

/// One record per metric defined in at least one report; rep_count counts
/// only the reports where the metric is defined.
inline void append_cell_records(std::vector<ResultRecord>& out, const CellKey& key, double ir, const std::vector<MetricsReport>& reports) {
  for (auto name : kMetricNames) {
    std::vector<double> values;
    for (const auto& r : reports) {
      if (auto v = metric_value(r, name)) values.push_back(*v);
    }
    if (values.empty()) continue;
    const auto a = aggregate(values);
    out.push_back({key.example, key.paradigm, key.resampler, key.learner, ir, std::string(name), a.mean, a.std_error, a.count});
  }
}

struct RepFailure {
  CellKey cell;
  double ir = 1.0;
  std::size_t rep = 0;
  std::optional<ErrorCode> code;  // absent for non-library exceptions
  std::string message;
};

struct CellSummary {
  CellKey cell;
  double ir = 1.0;
  std::size_t completed_reps = 0;
  std::size_t failed_reps = 0;
  std::size_t k_clamped_reps = 0;
  std::size_t clamped_scores = 0;
  double seconds = 0.0;
};

struct ExperimentResult {
  std::vector<ResultRecord> records;  // sorted by record_key_less
  std::vector<RepFailure> failures;
  std::vector<CellSummary> cells;  // configuration order
};

struct RunOptions {
  std::size_t threads = 1;
  /// Called after each finished repetition with (done, total); serialized.
  std::function<void(std::size_t, std::size_t)> progress{};
};

/// Cells in configuration order: paradigm, resampler, learner, IR.
inline std::vector<CellKey> enumerate_cells(const ExperimentConfig& config) {
  std::vector<CellKey> cells;
  for (const auto& p : config.paradigms) {
    for (auto r : config.resamplers) {
      for (auto l : config.learners) {
        for (std::size_t i = 0; i < config.ir_list.size(); ++i) cells.push_back({config.example, p.tag, r, l, i});
      }
    }
  }
  return cells;
}

/// Evaluates every (cell, rep). Each task writes only its own slot, so the
/// output does not depend on thread count or completion order.
inline ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {}) {
  config.validate();
  const auto cells = enumerate_cells(config);
  const std::size_t reps = config.repetitions;
  const std::size_t total = cells.size() * reps;

  struct Slot {
    std::optional<MetricsReport> report;
    RepDiagnostics diag;
    std::optional<ErrorCode> code;
    std::string error;
    double seconds = 0.0;
  };
  std::vector<Slot> slots(total);

  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  std::size_t done = 0;
  auto worker = [&] {
    for (std::size_t t = next.fetch_add(1); t < total; t = next.fetch_add(1)) {
      Slot& slot = slots[t];
      const auto start = std::chrono::steady_clock::now();
      try {
        slot.report = run_cell(config, cells[t / reps], t % reps, &slot.diag);
      } catch (const Error& e) {
        slot.code = e.code();
        slot.error = e.what();
      } catch (const std::exception& e) {
        slot.error = e.what();
      }
      slot.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (options.progress) {
        std::lock_guard lock(progress_mutex);
        options.progress(++done, total);
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, total));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  ExperimentResult result;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const CellKey& key = cells[c];
    const double ir = config.ir_list[key.ir_index];
    CellSummary summary{key, ir};
    std::vector<MetricsReport> reports;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const Slot& slot = slots[c * reps + rep];
      summary.seconds += slot.seconds;
      if (!slot.report) {
        ++summary.failed_reps;
        result.failures.push_back({key, ir, rep, slot.code, slot.error});
        continue;
      }
      ++summary.completed_reps;
      summary.k_clamped_reps += slot.diag.resample_notes.k_clamped ? 1 : 0;
      summary.clamped_scores += slot.diag.clamped_scores;
      reports.push_back(*slot.report);
    }
    append_cell_records(result.records, key, ir, reports);
    result.cells.push_back(summary);
  }
  std::sort(result.records.begin(), result.records.end(), record_key_less);
  return result;
}

}  // namespace imblab
