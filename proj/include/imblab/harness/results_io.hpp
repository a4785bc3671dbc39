#pragma once

// Results CSV: one row per (cell, metric) aggregate.

#include <algorithm>
#include <charconv>
#include <fstream>
#include <string>
#include <vector>

#include "imblab/harness/experiment.hpp"

namespace imblab {

inline constexpr std::string_view kResultsHeader = "example,paradigm,resampler,learner,ir,metric,mean,stderr,rep_count";

namespace detail {

template <typename Enum, std::size_t N>
Enum parse_name(std::string_view text, const std::array<Enum, N>& values, const char* what, const std::string& context) {
  for (Enum v : values) {
    if (to_string(v) == text) return v;
  }
  fail(ErrorCode::ParseError, context + ": unknown " + what + " '" + std::string(text) + "'");
}

}  // namespace detail

inline ExampleId parse_example(std::string_view s, const std::string& context) {
  return detail::parse_name(s, std::array{ExampleId::Example1, ExampleId::Example2}, "example", context);
}
inline Paradigm parse_paradigm(std::string_view s, const std::string& context) {
  return detail::parse_name(s, std::array{Paradigm::CC, Paradigm::CS, Paradigm::NP}, "paradigm", context);
}
inline ResampleKind parse_resampler(std::string_view s, const std::string& context) {
  return detail::parse_name(s, std::array{ResampleKind::Original, ResampleKind::Under, ResampleKind::Smote, ResampleKind::Hybrid},
                            "resampler", context);
}
inline LearnerKind parse_learner(std::string_view s, const std::string& context) {
  return detail::parse_name(s,
                            std::array{LearnerKind::LogisticRegression, LearnerKind::NeuralNet, LearnerKind::RandomForest,
                                       LearnerKind::Svm, LearnerKind::GradientBoostedTrees},
                            "learner", context);
}

/// Writes records sorted by record_key_less. Doubles use the shortest
/// round-trip form, so read_results recovers them exactly.
inline void write_results(std::vector<ResultRecord> records, const std::string& path) {
  if (records.empty()) fail(ErrorCode::EmptyInput, "write_results: no records");
  std::sort(records.begin(), records.end(), record_key_less);
  std::string body(kResultsHeader);
  body += '\n';
  for (const auto& r : records) {
    body += to_string(r.example);
    body += ',';
    body += to_string(r.paradigm);
    body += ',';
    body += to_string(r.resampler);
    body += ',';
    body += to_string(r.learner);
    body += ',' + detail::format_double(r.ir) + ',' + r.metric + ',' + detail::format_double(r.mean) + ',' +
            detail::format_double(r.std_error) + ',' + std::to_string(r.rep_count) + '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << body;
  out.flush();
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

inline std::vector<ResultRecord> read_results(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::ParseError, path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader) fail(ErrorCode::ParseError, path + ": unexpected header '" + line + "'");
  std::vector<ResultRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string ctx = path + ":" + std::to_string(line_no);
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 9) fail(ErrorCode::ParseError, ctx + ": expected 9 fields, got " + std::to_string(fields.size()));
    ResultRecord r;
    r.example = parse_example(fields[0], ctx);
    r.paradigm = parse_paradigm(fields[1], ctx);
    r.resampler = parse_resampler(fields[2], ctx);
    r.learner = parse_learner(fields[3], ctx);
    r.ir = detail::parse_double(fields[4], ctx);
    r.metric = std::string(fields[5]);
    if (std::find(kMetricNames.begin(), kMetricNames.end(), r.metric) == kMetricNames.end()) {
      fail(ErrorCode::ParseError, ctx + ": unknown metric '" + r.metric + "'");
    }
    r.mean = detail::parse_double(fields[6], ctx);
    r.std_error = detail::parse_double(fields[7], ctx);
    const auto count = fields[8];
    const auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), r.rep_count);
    if (ec != std::errc() || ptr != count.data() + count.size() || r.rep_count == 0) {
      fail(ErrorCode::ParseError, ctx + ": bad rep_count '" + std::string(count) + "'");
    }
    if (!(r.std_error >= 0.0)) fail(ErrorCode::ParseError, ctx + ": negative stderr");
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace imblab
