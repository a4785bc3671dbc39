#pragma once

#include <algorithm>
#include <vector>

#include "imblab/learners/common.hpp"

namespace imblab {

/// Logistic regression fitted by iteratively reweighted least squares with
/// step halving, so the negative log-likelihood never increases.
class LogisticModel {
 public:
  static LogisticModel fit(const LabeledDataset& train, const LogisticParams& params) {
    detail::require_trainable(train, "logistic regression");
    const Matrix& x = train.features();
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols() + 1;
    Matrix design(n, p);
    design.col(0).setOnes();
    design.rightCols(p - 1) = x;
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = train.labels()[static_cast<std::size_t>(i)];

    LogisticModel model;
    model.coef_ = Vector::Zero(p);
    double loss = nll(design, y, model.coef_);
    model.loss_history_.push_back(loss);
    for (int iter = 0; iter < params.max_iterations; ++iter) {
      const Vector eta = design * model.coef_;
      Vector prob(n), weight(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        prob(i) = detail::sigmoid(eta(i));
        weight(i) = prob(i) * (1.0 - prob(i));
      }
      Matrix hessian = design.transpose() * weight.asDiagonal() * design;
      hessian.diagonal().array() += params.ridge;
      const Vector grad = design.transpose() * (y - prob);
      const Vector step = hessian.ldlt().solve(grad);
      if (!step.allFinite()) fail(ErrorCode::NonFiniteLoss, "logistic regression: non-finite Newton step");

      double scale = 1.0;
      Vector candidate = model.coef_ + step;
      double candidate_loss = nll(design, y, candidate);
      for (int half = 0; half < 30 && !(candidate_loss <= loss); ++half) {
        scale *= 0.5;
        candidate = model.coef_ + scale * step;
        candidate_loss = nll(design, y, candidate);
      }
      if (!std::isfinite(candidate_loss)) fail(ErrorCode::NonFiniteLoss, "logistic regression: loss diverged");
      if (!(candidate_loss <= loss)) break;  // no descent along the Newton direction
      const double change = (scale * step).cwiseAbs().maxCoeff();
      model.coef_ = candidate;
      loss = candidate_loss;
      model.loss_history_.push_back(loss);
      if (change <= params.tolerance) break;
    }
    return model;
  }

  std::vector<double> score(const Matrix& x) const {
    detail::require_width(x, dim(), "logistic regression");
    std::vector<double> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      out[static_cast<std::size_t>(i)] = detail::sigmoid(coef_(0) + x.row(i).dot(coef_.tail(coef_.size() - 1)));
    }
    return out;
  }

  std::size_t dim() const { return static_cast<std::size_t>(coef_.size() - 1); }
  /// Intercept first, then one coefficient per feature.
  const Vector& coefficients() const { return coef_; }
  /// Negative log-likelihood after each accepted iteration (entry 0 is the start).
  const std::vector<double>& loss_history() const { return loss_history_; }

 private:
  static double nll(const Matrix& design, const Vector& y, const Vector& coef) {
    const Vector eta = design * coef;
    double total = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) total += detail::softplus(eta(i)) - y(i) * eta(i);
    return total;
  }

  Vector coef_;
  std::vector<double> loss_history_;
};

}  // namespace imblab
