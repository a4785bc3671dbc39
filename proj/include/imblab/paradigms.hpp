#pragma once

// Turning scores into labels under the classical, cost-sensitive and
// Neyman-Pearson objectives.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "imblab/dataset.hpp"
#include "imblab/error.hpp"

namespace imblab {

enum class Paradigm { CC, CS, NP };

constexpr std::string_view to_string(Paradigm p) {
  switch (p) {
    case Paradigm::CC: return "CC";
    case Paradigm::CS: return "CS";
    case Paradigm::NP: return "NP";
  }
  return "?";
}

struct ParadigmSpec {
  Paradigm tag = Paradigm::CC;
  double cost0 = 1.0;  // C0, cost of a type I error
  double cost1 = 1.0;  // C1, cost of a type II error
  double alpha = 0.05;
  double delta = 0.5;

  void validate() const {
    if (tag == Paradigm::CS && !(cost0 > 0.0 && cost1 > 0.0)) {
      fail(ErrorCode::ValidationError, "CS paradigm requires cost0 > 0 and cost1 > 0");
    }
    if (tag == Paradigm::NP && !(alpha > 0.0 && alpha < 1.0 && delta > 0.0 && delta < 1.0)) {
      fail(ErrorCode::ValidationError, "NP paradigm requires 0 < alpha < 1 and 0 < delta < 1");
    }
  }
};

struct ThresholdRule {
  enum class Provenance { Fixed, NpOrderStatistic };

  double cutoff = 0.5;
  Provenance provenance = Provenance::Fixed;
  std::optional<std::size_t> np_k;
  std::optional<std::size_t> np_n;
};

/// 1/2 for CC and C0 / (C0 + C1) for CS.
inline ThresholdRule fixed_threshold(const ParadigmSpec& spec) {
  if (spec.tag == Paradigm::NP) fail(ErrorCode::WrongParadigm, "NP thresholds come from np_calibrate");
  spec.validate();
  ThresholdRule rule;
  rule.cutoff = spec.tag == Paradigm::CC ? 0.5 : spec.cost0 / (spec.cost0 + spec.cost1);
  return rule;
}

/// Smallest rank k such that thresholding at the k-th smallest of n class-0
/// scores exceeds the alpha quantile with probability at most delta:
///   sum_{j=k}^{n} C(n,j) (1-alpha)^j alpha^(n-j) <= delta.
/// The tail is accumulated from j = n downward in log space.
inline std::size_t np_order_statistic_rank(std::size_t n, double alpha, double delta) {
  if (n == 0) fail(ErrorCode::SampleTooSmall, "np_order_statistic_rank: n must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0 && delta > 0.0 && delta < 1.0)) {
    fail(ErrorCode::InvalidArgument, "np_order_statistic_rank: alpha and delta must lie in (0,1)");
  }
  const double nn = static_cast<double>(n);
  const double log_keep = std::log1p(-alpha);
  const double log_alpha = std::log(alpha);
  const double log_delta = std::log(delta);
  auto log_term = [&](std::size_t j) {
    const double jj = static_cast<double>(j);
    return std::lgamma(nn + 1.0) - std::lgamma(jj + 1.0) - std::lgamma(nn - jj + 1.0) + jj * log_keep + (nn - jj) * log_alpha;
  };
  double log_tail = log_term(n);
  if (log_tail > log_delta) {
    fail(ErrorCode::SampleTooSmall, "np_order_statistic_rank: (1-alpha)^n > delta for n=" + std::to_string(n) +
                                        "; more held-out class-0 points are needed");
  }
  std::size_t rank = n;
  for (std::size_t k = n - 1; k >= 1; --k) {
    const double t = log_term(k);
    const double hi = std::max(log_tail, t);
    const double next = hi + std::log(std::exp(log_tail - hi) + std::exp(t - hi));
    if (next > log_delta) break;
    log_tail = next;
    rank = k;
  }
  return rank;
}

/// Threshold at the k*-th smallest of the given class-0 scores.
inline ThresholdRule np_threshold_from_scores(std::vector<double> class0_scores, double alpha, double delta) {
  const std::size_t n = class0_scores.size();
  const std::size_t k = np_order_statistic_rank(n, alpha, delta);
  std::nth_element(class0_scores.begin(), class0_scores.begin() + static_cast<std::ptrdiff_t>(k - 1), class0_scores.end());
  ThresholdRule rule;
  rule.cutoff = class0_scores[k - 1];
  rule.provenance = ThresholdRule::Provenance::NpOrderStatistic;
  rule.np_k = k;
  rule.np_n = n;
  return rule;
}

/// Scores held-out class-0 rows (disjoint from the model's training data)
/// and calibrates the order-statistic threshold. Works with any scorer that
/// exposes `score(const Matrix&)`.
template <typename Scorer>
ThresholdRule np_calibrate(const Scorer& model, const Matrix& heldout_class0, double alpha, double delta) {
  return np_threshold_from_scores(model.score(heldout_class0), alpha, delta);
}

/// Label 1 exactly when the score is strictly above the cutoff.
inline Labels classify(const std::vector<double>& scores, const ThresholdRule& rule) {
  Labels out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > rule.cutoff ? 1 : 0;
  return out;
}

}  // namespace imblab
