#pragma once

// Confusion-matrix metrics and threshold-free score metrics.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <string_view>
#include <vector>

#include "imblab/dataset.hpp"
#include "imblab/error.hpp"
#include "imblab/paradigms.hpp"

namespace imblab {

/// Class 1 is "positive", class 0 "negative".
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  std::size_t class0() const { return tn + fp; }
  std::size_t class1() const { return tp + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion(const Labels& y_true, const Labels& y_pred) {
  if (y_true.size() != y_pred.size()) fail(ErrorCode::LengthMismatch, "confusion: label vectors differ in length");
  if (y_true.empty()) fail(ErrorCode::EmptyInput, "confusion: no labels");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) fail(ErrorCode::InvalidLabel, "confusion: labels must be 0 or 1");
    if (t == 1) {
      (p == 1 ? cm.tp : cm.fn) += 1;
    } else {
      (p == 1 ? cm.fp : cm.tn) += 1;
    }
  }
  return cm;
}

struct ErrorRates {
  double risk = 0.0;
  std::optional<double> type1;  // FP / (TN + FP); absent without class-0 rows
  std::optional<double> type2;  // FN / (FN + TP); absent without class-1 rows
};

inline ErrorRates error_rates(const ConfusionMatrix& cm) {
  if (cm.total() == 0) fail(ErrorCode::EmptyInput, "error_rates: empty confusion matrix");
  ErrorRates r;
  r.risk = static_cast<double>(cm.fp + cm.fn) / static_cast<double>(cm.total());
  if (cm.class0() > 0) r.type1 = static_cast<double>(cm.fp) / static_cast<double>(cm.class0());
  if (cm.class1() > 0) r.type2 = static_cast<double>(cm.fn) / static_cast<double>(cm.class1());
  return r;
}

/// C0 pi0 R0 + C1 pi1 R1 with empirical class proportions.
inline double cost(const ConfusionMatrix& cm, double c0, double c1) {
  if (cm.class0() == 0 || cm.class1() == 0) fail(ErrorCode::MissingClass, "cost: both classes must be present");
  const double n = static_cast<double>(cm.total());
  const double pi0 = static_cast<double>(cm.class0()) / n;
  const double pi1 = static_cast<double>(cm.class1()) / n;
  const double r0 = static_cast<double>(cm.fp) / static_cast<double>(cm.class0());
  const double r1 = static_cast<double>(cm.fn) / static_cast<double>(cm.class1());
  return c0 * pi0 * r0 + c1 * pi1 * r1;
}

/// Harmonic mean of precision and recall for the given class, 0 when either
/// is undefined or zero.
inline double f_score(const ConfusionMatrix& cm, int positive_class) {
  const double hit = static_cast<double>(positive_class == 0 ? cm.tn : cm.tp);
  const double predicted = static_cast<double>(positive_class == 0 ? cm.tn + cm.fn : cm.tp + cm.fp);
  const double actual = static_cast<double>(positive_class == 0 ? cm.tn + cm.fp : cm.tp + cm.fn);
  if (predicted == 0.0 || actual == 0.0 || hit == 0.0) return 0.0;
  const double precision = hit / predicted;
  const double recall = hit / actual;
  return 2.0 / (1.0 / precision + 1.0 / recall);
}

namespace detail {

inline void require_scored(const std::vector<double>& scores, const Labels& y, const char* who) {
  if (scores.size() != y.size()) fail(ErrorCode::LengthMismatch, std::string(who) + ": scores vs labels");
  for (int v : y) {
    if (v != 0 && v != 1) fail(ErrorCode::InvalidLabel, std::string(who) + ": labels must be 0 or 1");
  }
}

}  // namespace detail

/// Mann-Whitney form: P(score of a class-1 row > score of a class-0 row),
/// ties counted one half. Computed from mid-ranks.
inline double roc_auc(const std::vector<double>& scores, const Labels& y) {
  detail::require_scored(scores, y, "roc_auc");
  const std::size_t n = scores.size();
  std::size_t n1 = 0;
  for (int v : y) n1 += static_cast<std::size_t>(v);
  const std::size_t n0 = n - n1;
  if (n0 == 0 || n1 == 0) fail(ErrorCode::MissingClass, "roc_auc: both classes must be present");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the rank sum keeps mid-ranks integral.
  double twice_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    std::size_t ones = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) ones += static_cast<std::size_t>(y[order[j++]]);
    twice_rank_sum += static_cast<double>(ones) * static_cast<double>(i + 1 + j);
    i = j;
  }
  const double u = twice_rank_sum / 2.0 - static_cast<double>(n1) * static_cast<double>(n1 + 1) / 2.0;
  return u / (static_cast<double>(n0) * static_cast<double>(n1));
}

/// Average precision: sum over distinct thresholds (descending positive-class
/// score) of (recall gain) x (precision at that threshold). Class 0 ranks by
/// negated scores. No interpolation between PR points.
inline double pr_auc(const std::vector<double>& scores, const Labels& y, int positive_class) {
  detail::require_scored(scores, y, "pr_auc");
  const std::size_t n = scores.size();
  std::size_t positives = 0;
  for (int v : y) positives += static_cast<std::size_t>(v == positive_class);
  if (positives == 0) fail(ErrorCode::MissingClass, "pr_auc: positive class absent");

  const double sign = positive_class == 1 ? 1.0 : -1.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sign * scores[a] > sign * scores[b]; });
  double area = 0.0;
  std::size_t tp = 0, seen = 0, i = 0;
  while (i < n) {
    std::size_t gained = 0;
    const double level = scores[order[i]];
    while (i < n && scores[order[i]] == level) {
      gained += static_cast<std::size_t>(y[order[i]] == positive_class);
      ++seen;
      ++i;
    }
    if (gained == 0) continue;
    tp += gained;
    area += (static_cast<double>(gained) / static_cast<double>(positives)) * (static_cast<double>(tp) / static_cast<double>(seen));
  }
  return area;
}

struct MetricsReport {
  double risk = 0.0;
  std::optional<double> type1;
  std::optional<double> type2;
  double cost = 0.0;
  double f0 = 0.0;
  double f1 = 0.0;
  double roc_auc = 0.0;
  double pr_auc0 = 0.0;
  double pr_auc1 = 0.0;
  double pi0_hat = 0.0;
  double pi1_hat = 0.0;
  ConfusionMatrix confusion;
};

/// Names and reporting order of the aggregated metrics.
inline constexpr std::array<std::string_view, 9> kMetricNames = {
    "risk", "type1", "type2", "cost", "f0", "f1", "roc_auc", "pr_auc0", "pr_auc1"};

/// Metrics where smaller is better; the rest are maximized.
constexpr bool lower_is_better(std::string_view metric) {
  return metric == "risk" || metric == "type1" || metric == "type2" || metric == "cost";
}

inline std::optional<double> metric_value(const MetricsReport& r, std::string_view name) {
  if (name == "risk") return r.risk;
  if (name == "type1") return r.type1;
  if (name == "type2") return r.type2;
  if (name == "cost") return r.cost;
  if (name == "f0") return r.f0;
  if (name == "f1") return r.f1;
  if (name == "roc_auc") return r.roc_auc;
  if (name == "pr_auc0") return r.pr_auc0;
  if (name == "pr_auc1") return r.pr_auc1;
  return std::nullopt;
}

inline MetricsReport full_report(const std::vector<double>& scores, const ThresholdRule& rule, const Labels& y_true, double c0,
                                 double c1) {
  detail::require_scored(scores, y_true, "full_report");
  MetricsReport r;
  r.confusion = confusion(y_true, classify(scores, rule));
  const auto& cm = r.confusion;
  if (cm.class0() == 0 || cm.class1() == 0) fail(ErrorCode::MissingClass, "full_report: both classes must be present");
  const auto rates = error_rates(cm);
  r.risk = rates.risk;
  r.type1 = rates.type1;
  r.type2 = rates.type2;
  r.cost = cost(cm, c0, c1);
  r.f0 = f_score(cm, 0);
  r.f1 = f_score(cm, 1);
  r.roc_auc = roc_auc(scores, y_true);
  r.pr_auc0 = pr_auc(scores, y_true, 0);
  r.pr_auc1 = pr_auc(scores, y_true, 1);
  r.pi0_hat = static_cast<double>(cm.class0()) / static_cast<double>(cm.total());
  r.pi1_hat = static_cast<double>(cm.class1()) / static_cast<double>(cm.total());
  return r;
}

}  // namespace imblab
