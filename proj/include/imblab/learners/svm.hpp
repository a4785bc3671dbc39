#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>
#include <vector>

#include "imblab/learners/common.hpp"

namespace imblab {

namespace detail {

/// LRU cache of kernel columns K(x_i, .) stored in single precision.
class KernelColumnCache {
 public:
  KernelColumnCache(const Matrix& x, double gamma, double megabytes)
      : columns_(x.cast<float>()), gamma_(static_cast<float>(gamma)), n_(static_cast<std::size_t>(x.rows())) {
    const double bytes_per_column = static_cast<double>(n_) * sizeof(float);
    capacity_ = std::max<std::size_t>(2, static_cast<std::size_t>(megabytes * 1024.0 * 1024.0 / bytes_per_column));
  }

  /// Entries are Eigen-allocated so vectorized exp sees the same alignment
  /// on every run; results do not depend on heap addresses.
  const Eigen::ArrayXf& column(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->values;
    }
    Eigen::ArrayXf values;
    if (lru_.size() >= capacity_) {
      values = std::move(lru_.back().values);
      index_.erase(lru_.back().row);
      lru_.pop_back();
    }
    values.resize(static_cast<Eigen::Index>(n_));
    const auto ii = static_cast<Eigen::Index>(i);
    const Eigen::Index n = values.size();
    // Chunks stay in L1; each entry sees the same operations in the same order.
    // Chunk starts are multiples of kChunk, so the packet split is fixed.
    for (Eigen::Index start = 0; start < n; start += kChunk) {
      const Eigen::Index len = std::min(kChunk, n - start);
      auto chunk = values.segment(start, len);
      chunk.setZero();
      for (Eigen::Index j = 0; j < columns_.cols(); ++j) {
        chunk += (columns_.col(j).array().segment(start, len) - columns_(ii, j)).square();
      }
      chunk = (-gamma_ * chunk).exp();
    }
    lru_.push_front({i, std::move(values)});
    index_[i] = lru_.begin();
    return lru_.front().values;
  }

 private:
  static constexpr Eigen::Index kChunk = 2048;

  struct Entry {
    std::size_t row;
    Eigen::ArrayXf values;
  };

  Eigen::MatrixXf columns_;  // column-major copy of the training rows
  float gamma_;
  std::size_t n_;
  std::size_t capacity_;
  std::list<Entry> lru_;
  std::unordered_map<std::size_t, std::list<Entry>::iterator> index_;
};

}  // namespace detail

/// C-SVC with an RBF kernel solved by SMO with second-order working-set
/// selection, followed by Platt scaling of the training decision values.
class SvmModel {
 public:
  struct SolverReport {
    long iterations = 0;
    bool converged = false;
    std::size_t support_vectors = 0;
  };

  static SvmModel fit(const LabeledDataset& train, const SvmParams& params) {
    detail::require_trainable(train, "svm");
    if (!(params.cost > 0.0) || !(params.tolerance > 0.0) || params.max_iterations < 1) {
      fail(ErrorCode::InvalidArgument, "svm: bad hyperparameters");
    }
    const Matrix& x = train.features();
    const std::size_t n = train.size();
    const double c = params.cost;

    SvmModel model;
    model.dim_ = train.dim();
    model.gamma_ = params.gamma > 0.0 ? params.gamma : 1.0 / static_cast<double>(model.dim_);

    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = train.labels()[i] == 1 ? 1.0 : -1.0;
    // yg[t] = y_t * grad_t, where grad = Q alpha - 1 and Q_ts = y_t y_s K_ts.
    std::vector<double> alpha(n, 0.0);
    Eigen::ArrayXd yg(static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < n; ++t) yg(static_cast<Eigen::Index>(t)) = -y[t];
    // Index sets of the dual: alpha_t may increase along y_t (up) or decrease
    // (low). Membership is stored as an additive penalty, 0 inside the set and
    // -inf outside, so the selection scans are branch-free. Both values are
    // exact in single precision.
    constexpr double kInf = std::numeric_limits<double>::infinity();
    constexpr float kInfF = std::numeric_limits<float>::infinity();
    std::vector<float> up_pen(n), low_pen(n);
    auto refresh = [&](std::size_t t) {
      const bool up = y[t] > 0 ? alpha[t] < c : alpha[t] > 0.0;
      const bool low = y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < c;
      up_pen[t] = up ? 0.0f : -kInfF;
      low_pen[t] = low ? 0.0f : -kInfF;
    };
    for (std::size_t t = 0; t < n; ++t) refresh(t);
    detail::KernelColumnCache cache(x, model.gamma_, params.cache_megabytes);
    constexpr double kTau = 1e-12;
    // Per-iteration scans run over fixed chunks held in L1. The first chunk
    // whose maximum strictly exceeds all earlier ones holds the first global
    // argmax, so chunked argmax equals the whole-array one.
    constexpr std::size_t kChunk = 2048;
    Eigen::ArrayXd work(static_cast<Eigen::Index>(kChunk)), sums(static_cast<Eigen::Index>(kChunk));
    auto take_if_larger = [&](std::size_t start, std::size_t len, double& best, std::size_t& at) {
      const double m = work.head(static_cast<Eigen::Index>(len)).maxCoeff();
      if (m > best) {
        best = m;
        std::size_t k = 0;
        while (work(static_cast<Eigen::Index>(k)) != m) ++k;
        at = start + k;
      }
    };
    // i: maximal violator among the up set, refreshed after each update.
    double gmax = -kInf;
    std::size_t i = n;
    auto select_i = [&](double wi, const float* ki, double wj, const float* kj) {
      gmax = -kInf;
      i = n;
      double* ygp = yg.data();
      for (std::size_t start = 0; start < n; start += kChunk) {
        const std::size_t len = std::min(kChunk, n - start);
        double* out = work.data();
        if (ki != nullptr) {
          for (std::size_t s = start; s < start + len; ++s) {
            ygp[s] += wi * static_cast<double>(ki[s]) + wj * static_cast<double>(kj[s]);
          }
        }
        for (std::size_t t = 0; t < len; ++t) out[t] = static_cast<double>(up_pen[start + t]) - ygp[start + t];
        take_if_larger(start, len, gmax, i);
      }
    };
    select_i(0.0, nullptr, 0.0, nullptr);
    long iter = 0;
    for (; iter < params.max_iterations; ++iter) {
      if (i == n) {
        model.report_.converged = true;
        break;
      }
      const Eigen::ArrayXf& ki = cache.column(i);
      // j: second-order choice among the low set with positive violation,
      // maximizing (gmax + yg_t)^2 / (K_ii + K_tt - 2 K_it).
      double gmax2 = -kInf, best = -kInf;
      std::size_t j = n;
      for (std::size_t start = 0; start < n; start += kChunk) {
        const std::size_t len = std::min(kChunk, n - start);
        const double* ygp = yg.data() + start;
        const float* lowp = low_pen.data() + start;
        const float* kip = ki.data() + start;
        double* out = work.data();
        double* low_sum = sums.data();
        for (std::size_t t = 0; t < len; ++t) {
          double quad = 2.0 - 2.0 * static_cast<double>(kip[t]);  // K_ii + K_tt - 2 K_it
          quad = quad > 0.0 ? quad : kTau;
          low_sum[t] = ygp[t] + static_cast<double>(lowp[t]);
          double violation = gmax + low_sum[t];
          violation = violation > 0.0 ? violation : 0.0;
          out[t] = violation * violation / quad;
        }
        gmax2 = std::max(gmax2, sums.head(static_cast<Eigen::Index>(len)).maxCoeff());
        take_if_larger(start, len, best, j);
      }
      if (gmax + gmax2 < params.tolerance || !(best > 0.0)) {
        model.report_.converged = true;
        break;
      }
      const Eigen::ArrayXf& kj = cache.column(j);
      const Eigen::ArrayXf& ki_again = cache.column(i);  // j's fetch may have evicted i

      const double old_ai = alpha[i], old_aj = alpha[j];
      const double gi = y[i] * yg(static_cast<Eigen::Index>(i)), gj = y[j] * yg(static_cast<Eigen::Index>(j));
      double quad = 2.0 - 2.0 * static_cast<double>(ki_again[static_cast<Eigen::Index>(j)]);
      if (quad <= 0.0) quad = kTau;
      if (y[i] != y[j]) {
        const double delta = (-gi - gj) / quad;
        const double diff = alpha[i] - alpha[j];
        alpha[i] += delta;
        alpha[j] += delta;
        if (diff > 0.0) {
          if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
        } else {
          if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
        }
        if (diff > 0.0) {
          if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
        } else {
          if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
        }
      } else {
        const double delta = (gi - gj) / quad;
        const double sum = alpha[i] + alpha[j];
        alpha[i] -= delta;
        alpha[j] += delta;
        if (sum > c) {
          if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
        } else {
          if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
        }
        if (sum > c) {
          if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
        } else {
          if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
        }
      }
      refresh(i);
      refresh(j);
      const double wi = y[i] * (alpha[i] - old_ai), wj = y[j] * (alpha[j] - old_aj);
      select_i(wi, ki_again.data(), wj, kj.data());
    }
    model.report_.iterations = iter;

    // Offset from the KKT conditions: mean over free vectors, else the bound midpoint.
    double upper = kInf, lower = -kInf, free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
      if (alpha[t] >= c) {
        if (y[t] < 0) upper = std::min(upper, yg[t]); else lower = std::max(lower, yg[t]);
      } else if (alpha[t] <= 0.0) {
        if (y[t] > 0) upper = std::min(upper, yg[t]); else lower = std::max(lower, yg[t]);
      } else {
        ++free_count;
        free_sum += yg[t];
      }
    }
    model.rho_ = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (upper + lower);

    std::vector<double> decision(n);
    // sum_s alpha_s y_s K_ts = y_t (grad_t + 1) = yg_t + y_t.
    for (std::size_t t = 0; t < n; ++t) decision[t] = yg[t] + y[t] - model.rho_;

    std::vector<std::size_t> support;
    for (std::size_t t = 0; t < n; ++t) {
      if (alpha[t] > 0.0) support.push_back(t);
    }
    model.vectors_ = Matrix(static_cast<Eigen::Index>(support.size()), x.cols());
    model.coef_.resize(static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) {
      model.vectors_.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(support[k]));
      model.coef_(static_cast<Eigen::Index>(k)) = alpha[support[k]] * y[support[k]];
    }
    model.report_.support_vectors = support.size();
    model.fit_platt(decision, y);
    return model;
  }

  /// Raw decision values sum_k coef_k K(sv_k, x) - rho.
  std::vector<double> decision_values(const Matrix& x) const {
    detail::require_width(x, dim_, "svm");
    const Eigen::Index m = x.rows();
    std::vector<double> out(static_cast<std::size_t>(m));
    if (coef_.size() == 0) {
      std::fill(out.begin(), out.end(), -rho_);
      return out;
    }
    const Vector sv_norms = vectors_.rowwise().squaredNorm();
    constexpr Eigen::Index kBlock = 128;
    for (Eigen::Index start = 0; start < m; start += kBlock) {
      const Eigen::Index rows = std::min(kBlock, m - start);
      const auto block = x.middleRows(start, rows);
      Eigen::MatrixXd dist = -2.0 * (block * vectors_.transpose());
      dist.colwise() += block.rowwise().squaredNorm();
      dist.rowwise() += sv_norms.transpose();
      const Vector sums = (-gamma_ * dist.array().max(0.0)).exp().matrix() * coef_;
      for (Eigen::Index r = 0; r < rows; ++r) out[static_cast<std::size_t>(start + r)] = sums(r) - rho_;
    }
    return out;
  }

  std::vector<double> score(const Matrix& x) const {
    auto out = decision_values(x);
    for (double& v : out) v = platt_probability(v);
    return out;
  }

  std::size_t dim() const { return dim_; }
  const SolverReport& report() const { return report_; }
  double platt_a() const { return platt_a_; }
  double platt_b() const { return platt_b_; }

 private:
  double platt_probability(double decision) const {
    const double z = decision * platt_a_ + platt_b_;
    return detail::sigmoid(-z);
  }

  /// Platt's sigmoid fit with smoothed targets, solved by Newton's method
  /// with backtracking.
  void fit_platt(const std::vector<double>& dec, const std::vector<double>& y) {
    const std::size_t n = dec.size();
    double prior1 = 0.0, prior0 = 0.0;
    for (double v : y) (v > 0 ? prior1 : prior0) += 1.0;
    const double hi = (prior1 + 1.0) / (prior1 + 2.0);
    const double lo = 1.0 / (prior0 + 2.0);
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i) target[i] = y[i] > 0 ? hi : lo;

    auto objective = [&](double a, double b) {
      double f = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double z = dec[i] * a + b;
        f += z >= 0 ? target[i] * z + std::log1p(std::exp(-z)) : (target[i] - 1.0) * z + std::log1p(std::exp(z));
      }
      return f;
    };

    double a = 0.0, b = std::log((prior0 + 1.0) / (prior1 + 1.0));
    double fval = objective(a, b);
    constexpr double kSigma = 1e-12, kEps = 1e-5, kMinStep = 1e-10;
    for (int iter = 0; iter < 100; ++iter) {
      double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double z = dec[i] * a + b;
        const double p = detail::sigmoid(-z);
        const double q = 1.0 - p;
        const double d2 = p * q;
        h11 += dec[i] * dec[i] * d2;
        h22 += d2;
        h21 += dec[i] * d2;
        const double d1 = target[i] - p;
        g1 += dec[i] * d1;
        g2 += d1;
      }
      if (std::abs(g1) < kEps && std::abs(g2) < kEps) break;
      const double det = h11 * h22 - h21 * h21;
      const double da = -(h22 * g1 - h21 * g2) / det;
      const double db = -(-h21 * g1 + h11 * g2) / det;
      const double gd = g1 * da + g2 * db;
      double step = 1.0;
      while (step >= kMinStep) {
        const double na = a + step * da, nb = b + step * db;
        const double nf = objective(na, nb);
        if (nf < fval + 1e-4 * step * gd) {
          a = na;
          b = nb;
          fval = nf;
          break;
        }
        step *= 0.5;
      }
      if (step < kMinStep) break;
    }
    platt_a_ = a;
    platt_b_ = b;
  }

  std::size_t dim_ = 0;
  double gamma_ = 0.0;
  double rho_ = 0.0;
  Matrix vectors_;
  Vector coef_;
  double platt_a_ = 0.0;
  double platt_b_ = 0.0;
  SolverReport report_;
};

}  // namespace imblab
