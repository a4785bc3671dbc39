#pragma once

// Synthetic class-conditional distributions and their Bayes oracles.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "imblab/dataset.hpp"
#include "imblab/error.hpp"
#include "imblab/random.hpp"

namespace imblab {

struct GaussianSpec {
  Vector mean;
  Matrix covariance;
};

struct MixtureSpec {
  std::vector<GaussianSpec> components;
  std::vector<double> weights;
};

enum class ExampleId { Example1, Example2 };

constexpr std::string_view to_string(ExampleId id) {
  return id == ExampleId::Example1 ? "Example1" : "Example2";
}

namespace detail {

inline Matrix cholesky_factor(const Matrix& a, bool allow_semidefinite) {
  if (a.rows() != a.cols()) fail(ErrorCode::InvalidArgument, "cholesky: matrix is not square");
  const Eigen::Index n = a.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (a(i, j) != a(j, i)) fail(ErrorCode::InvalidArgument, "cholesky: matrix is not symmetric");
    }
  }
  const double scale = n > 0 ? std::max(1.0, a.diagonal().cwiseAbs().maxCoeff()) : 1.0;
  const double zero_tol = 1e-12 * scale;
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (pivot > 0.0 && !(allow_semidefinite && pivot <= zero_tol)) {
      const double ljj = std::sqrt(pivot);
      l(j, j) = ljj;
      for (Eigen::Index i = j + 1; i < n; ++i) {
        double s = a(i, j);
        for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
        l(i, j) = s / ljj;
      }
      continue;
    }
    if (!allow_semidefinite || pivot < -zero_tol) {
      fail(ErrorCode::NotPositiveDefinite, "cholesky: pivot " + std::to_string(j) + " = " + std::to_string(pivot));
    }
    // Zero pivot of a semidefinite matrix: the rest of the column must vanish.
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (std::abs(s) > zero_tol) {
        fail(ErrorCode::NotPositiveDefinite, "cholesky: singular pivot " + std::to_string(j) + " with nonzero column");
      }
    }
  }
  return l;
}

inline void validate(const GaussianSpec& spec) {
  if (spec.covariance.rows() != spec.mean.size() || spec.covariance.cols() != spec.mean.size()) {
    fail(ErrorCode::DimensionMismatch, "gaussian: covariance is not d x d for mean of length " +
                                           std::to_string(spec.mean.size()));
  }
}

inline Matrix draw_gaussian_rows(const Vector& mean, const Matrix& factor, std::size_t count, Rng& rng) {
  const Eigen::Index d = mean.size();
  Matrix out(static_cast<Eigen::Index>(count), d);
  Vector z(d);
  for (std::size_t r = 0; r < count; ++r) {
    for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.normal();
    out.row(static_cast<Eigen::Index>(r)) = (mean + factor.triangularView<Eigen::Lower>() * z).transpose();
  }
  return out;
}

}  // namespace detail

/// Lower-triangular L with L * L^T == covariance. Throws NotPositiveDefinite
/// when a pivot is not strictly positive.
inline Matrix cholesky(const Matrix& covariance) { return detail::cholesky_factor(covariance, false); }

/// Rows are i.i.d. mean + L z. Degenerate (positive semidefinite) covariances
/// are accepted so that a zero covariance yields the mean itself.
inline Matrix mvn_sample(const GaussianSpec& spec, std::size_t count, Rng& rng) {
  if (count == 0) fail(ErrorCode::InvalidArgument, "mvn_sample: count must be >= 1");
  detail::validate(spec);
  const Matrix factor = detail::cholesky_factor(spec.covariance, true);
  return detail::draw_gaussian_rows(spec.mean, factor, count, rng);
}

inline void validate(const MixtureSpec& spec) {
  if (spec.components.empty()) fail(ErrorCode::InvalidArgument, "mixture: no components");
  if (spec.weights.size() != spec.components.size()) fail(ErrorCode::LengthMismatch, "mixture: weights vs components");
  double total = 0.0;
  for (double w : spec.weights) {
    if (!(w >= 0.0 && w <= 1.0)) fail(ErrorCode::InvalidArgument, "mixture: weight outside [0,1]");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) fail(ErrorCode::InvalidArgument, "mixture: weights do not sum to 1");
  for (const auto& c : spec.components) {
    detail::validate(c);
    if (c.mean.size() != spec.components.front().mean.size()) fail(ErrorCode::DimensionMismatch, "mixture: component widths differ");
  }
}

/// Categorical component choice per row, then a Gaussian draw. A single
/// component skips the categorical draw so the stream matches mvn_sample.
inline Matrix mixture_sample(const MixtureSpec& spec, std::size_t count, Rng& rng) {
  if (count == 0) fail(ErrorCode::InvalidArgument, "mixture_sample: count must be >= 1");
  validate(spec);
  if (spec.components.size() == 1) return mvn_sample(spec.components.front(), count, rng);

  std::vector<Matrix> factors;
  for (const auto& c : spec.components) factors.push_back(detail::cholesky_factor(c.covariance, true));
  std::vector<double> cumulative(spec.weights.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < spec.weights.size(); ++k) cumulative[k] = (acc += spec.weights[k]);

  const Eigen::Index d = spec.components.front().mean.size();
  Matrix out(static_cast<Eigen::Index>(count), d);
  for (std::size_t r = 0; r < count; ++r) {
    const double u = rng.uniform();
    std::size_t k = 0;
    while (k + 1 < cumulative.size() && !(u < cumulative[k])) ++k;
    out.row(static_cast<Eigen::Index>(r)) =
        detail::draw_gaussian_rows(spec.components[k].mean, factors[k], 1, rng).row(0);
  }
  return out;
}

/// Parameters shared by both simulation settings.
struct ExampleParameters {
  Vector mu0;
  Vector mu1;
  Matrix sigma;
};

inline ExampleParameters example_parameters() {
  ExampleParameters p;
  p.mu0 = Vector::Zero(5);
  p.mu1 = Vector(5);
  p.mu1 << 2, 2, 2, 0, 0;
  p.sigma = Matrix(5, 5);
  p.sigma << 1.0, 0.5, 0.25, 0, 0,
             0.5, 1.0, 0.5, 0, 0,
             0.25, 0.5, 1.0, 0, 0,
             0, 0, 0, 1, 0,
             0, 0, 0, 0, 1;
  return p;
}

/// Class-conditional distribution of one class. Example 2 puts the single
/// Gaussian at the midpoint on class 0 and the two-component mixture on class 1.
inline MixtureSpec class_distribution(ExampleId example, int cls) {
  const ExampleParameters p = example_parameters();
  if (example == ExampleId::Example1) {
    return MixtureSpec{{GaussianSpec{cls == 0 ? p.mu0 : p.mu1, p.sigma}}, {1.0}};
  }
  if (cls == 0) return MixtureSpec{{GaussianSpec{0.5 * (p.mu0 + p.mu1), p.sigma}}, {1.0}};
  return MixtureSpec{{GaussianSpec{p.mu0, p.sigma}, GaussianSpec{p.mu1, p.sigma}}, {0.5, 0.5}};
}

/// Majority size for a requested ratio; non-integer ratios are rounded.
inline std::size_t majority_count(double ir, std::size_t minority_count) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(minority_count) * ir));
}

/// Class-0 rows first, then class-1 rows.
inline LabeledDataset make_dataset(ExampleId example, double ir, std::size_t minority_count, Rng& rng) {
  if (!(ir >= 1.0) || !std::isfinite(ir)) fail(ErrorCode::InvalidRatio, "imbalance ratio must be >= 1, got " + std::to_string(ir));
  if (minority_count == 0) fail(ErrorCode::InvalidArgument, "minority_count must be >= 1");
  const std::size_t n1 = majority_count(ir, minority_count);
  Matrix x0 = mixture_sample(class_distribution(example, 0), minority_count, rng);
  Matrix x1 = mixture_sample(class_distribution(example, 1), n1, rng);
  Matrix x(x0.rows() + x1.rows(), x0.cols());
  x.topRows(x0.rows()) = x0;
  x.bottomRows(x1.rows()) = x1;
  Labels y(minority_count, 0);
  y.resize(minority_count + n1, 1);
  return LabeledDataset(std::move(x), std::move(y));
}

namespace detail {

struct GaussianLogDensity {
  Vector mean;
  Matrix factor;
  double log_norm = 0.0;

  explicit GaussianLogDensity(const GaussianSpec& spec) : mean(spec.mean), factor(cholesky(spec.covariance)) {
    const double log_det = 2.0 * factor.diagonal().array().log().sum();
    log_norm = -0.5 * (static_cast<double>(mean.size()) * std::log(2.0 * std::numbers::pi) + log_det);
  }

  double operator()(const Vector& x) const {
    const Vector z = factor.triangularView<Eigen::Lower>().solve(x - mean);
    return log_norm - 0.5 * z.squaredNorm();
  }
};

inline double mixture_log_density(const MixtureSpec& spec, const Vector& x) {
  std::vector<double> terms;
  for (std::size_t k = 0; k < spec.components.size(); ++k) {
    if (spec.weights[k] > 0.0) terms.push_back(std::log(spec.weights[k]) + GaussianLogDensity(spec.components[k])(x));
  }
  const double top = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  return top + std::log(s);
}

inline double class1_log_odds(ExampleId example, const Vector& x, double ir) {
  if (x.size() != 5) fail(ErrorCode::DimensionMismatch, "bayes_eta expects d=5");
  return std::log(ir) + mixture_log_density(class_distribution(example, 1), x) -
         mixture_log_density(class_distribution(example, 0), x);
}

}  // namespace detail

/// P(Y=1 | X=x) with prior odds pi1/pi0 = ir.
inline double bayes_eta(ExampleId example, const Vector& x, double ir) {
  return 1.0 / (1.0 + std::exp(-detail::class1_log_odds(example, x, ir)));
}

/// P(Y=0 | X=x), computed independently of bayes_eta's rounding path.
inline double bayes_posterior0(ExampleId example, const Vector& x, double ir) {
  return 1.0 / (1.0 + std::exp(detail::class1_log_odds(example, x, ir)));
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// (mu1 - mu0)^T Sigma^{-1} (mu1 - mu0) for the shared parameters.
inline double mahalanobis_sq() {
  const ExampleParameters p = example_parameters();
  const Vector diff = p.mu1 - p.mu0;
  return diff.dot(p.sigma.llt().solve(diff));
}

/// Risk of 1{eta(x) > 1/2} in the equal-covariance setting with prior odds ir.
/// The log-likelihood ratio is N(-D^2/2, D^2) under class 0 and N(D^2/2, D^2)
/// under class 1, and the oracle cuts it at -log(ir).
inline double bayes_risk_example1(double ir) {
  if (!(ir >= 1.0)) fail(ErrorCode::InvalidRatio, "bayes_risk_example1 requires ir >= 1");
  const double delta = std::sqrt(mahalanobis_sq());
  const double pi0 = 1.0 / (1.0 + ir);
  const double pi1 = ir / (1.0 + ir);
  const double shift = std::log(ir) / delta;
  const double type1 = normal_cdf(-delta / 2.0 + shift);
  const double type2 = normal_cdf(-delta / 2.0 - shift);
  return pi0 * type1 + pi1 * type2;
}

}  // namespace imblab
