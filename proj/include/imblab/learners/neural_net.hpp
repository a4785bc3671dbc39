#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "imblab/learners/common.hpp"
#include "imblab/random.hpp"

namespace imblab {

/// One hidden ReLU layer feeding a sigmoid output, trained on mean binary
/// cross-entropy with full-batch Adam. Several seeded restarts are trained
/// and the one with the lowest final loss is kept.
///
/// Parameters live in one flat vector laid out as
///   [ W1 (hidden x d, row-major) | b1 (hidden) | w2 (hidden) | b2 ].
class NeuralNetModel {
 public:
  struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> gradient;
  };

  static std::size_t parameter_count(std::size_t d, std::size_t hidden) { return hidden * d + 2 * hidden + 1; }

  /// Mean cross-entropy and its exact gradient for a given parameter vector.
  static LossAndGradient loss_and_gradient(std::span<const double> theta, const Matrix& x, const Labels& y,
                                           std::size_t hidden) {
    LossAndGradient out;
    out.loss = accumulate<true>(theta, Packed(x, y), hidden, out.gradient);
    return out;
  }

  static NeuralNetModel fit(const LabeledDataset& train, const NeuralNetParams& params, std::uint64_t seed) {
    detail::require_trainable(train, "neural net");
    if (params.hidden_units < 1 || params.epochs < 1 || !(params.learning_rate > 0.0) || params.restarts < 1) {
      fail(ErrorCode::InvalidArgument, "neural net: bad hyperparameters");
    }
    const Packed data(train.features(), train.labels());
    NeuralNetModel best;
    double best_loss = 0.0;
    for (int r = 0; r < params.restarts; ++r) {
      double loss = 0.0;
      NeuralNetModel candidate = fit_once(data, params, splitmix64(seed + static_cast<std::uint64_t>(r)), loss);
      // Strict comparison keeps the earliest restart on ties.
      if (r == 0 || loss < best_loss) {
        best_loss = loss;
        best = std::move(candidate);
      }
    }
    return best;
  }

  static std::vector<double> initial_parameters(std::size_t d, std::size_t hidden, double range, std::uint64_t seed,
                                                double hidden_bias = 0.0) {
    Rng rng(seed);
    std::vector<double> theta(parameter_count(d, hidden));
    for (double& t : theta) t = rng.uniform(-range, range);
    for (std::size_t h = 0; h < hidden; ++h) theta[hidden * d + h] = hidden_bias;
    return theta;
  }

  std::vector<double> score(const Matrix& x) const {
    detail::require_width(x, dim_, "neural net");
    const double* w1 = theta_.data();
    const double* b1 = w1 + hidden_ * dim_;
    const double* w2 = b1 + hidden_;
    const double b2 = w2[hidden_];
    std::vector<double> out(static_cast<std::size_t>(x.rows()));
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double* row = x.data() + i * dim_;
      double z = b2;
      for (std::size_t h = 0; h < hidden_; ++h) {
        double s = b1[h];
        for (std::size_t j = 0; j < dim_; ++j) s += w1[h * dim_ + j] * row[j];
        if (s > 0.0) z += w2[h] * s;
      }
      out[i] = detail::sigmoid(z);
    }
    return out;
  }

  std::size_t dim() const { return dim_; }
  const std::vector<double>& parameters() const { return theta_; }

 private:
  static constexpr Eigen::Index kBlock = 64;
  using Block = Eigen::Array<double, 1, kBlock>;

  /// Training rows regrouped into fixed-size feature-major blocks. The last
  /// block is zero padded and its padding lanes carry mask 0.
  struct Packed {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<Block> x;  // block b, feature j at b * d + j
    std::vector<Block> target;
    std::vector<Block> mask;

    Packed(const Matrix& features, const Labels& labels)
        : n(static_cast<std::size_t>(features.rows())), d(static_cast<std::size_t>(features.cols())) {
      const std::size_t blocks = (n + kBlock - 1) / kBlock;
      x.assign(blocks * d, Block::Zero());
      target.assign(blocks, Block::Zero());
      mask.assign(blocks, Block::Zero());
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t b = i / kBlock;
        const auto k = static_cast<Eigen::Index>(i % kBlock);
        for (std::size_t j = 0; j < d; ++j) x[b * d + j](k) = features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        target[b](k) = labels[i];
        mask[b](k) = 1.0;
      }
    }
  };

  /// Fills the mean cross-entropy gradient. Returns the mean loss when
  /// WithLoss, otherwise the sum of absolute output logits.
  ///
  /// Every step vectorizes across the rows of a block; fixed-size aligned
  /// buffers keep the packet paths, and therefore the results, independent
  /// of where the data lives.
  template <bool WithLoss>
  static double accumulate(std::span<const double> theta, const Packed& data, std::size_t hidden,
                           std::vector<double>& gradient) {
    const std::size_t d = data.d;
    const double* w1 = theta.data();
    const double* b1 = w1 + hidden * d;
    const double* w2 = b1 + hidden;
    const double b2 = w2[hidden];

    // Per-lane partial sums, reduced once after the last block.
    std::vector<Block> partial(theta.size() + 1, Block::Zero());
    Block* gw1 = partial.data();
    Block* gb1 = gw1 + hidden * d;
    Block* gw2 = gb1 + hidden;
    Block& gb2 = gw2[hidden];
    Block& total = partial.back();

    std::vector<Block> pre(hidden), act(hidden);
    Block z, dz, dh;
    for (std::size_t b = 0; b < data.target.size(); ++b) {
      const Block* xb = data.x.data() + b * d;
      const Block& target = data.target[b];
      const Block& mask = data.mask[b];
      z.setConstant(b2);
      for (std::size_t h = 0; h < hidden; ++h) {
        pre[h].setConstant(b1[h]);
        for (std::size_t j = 0; j < d; ++j) pre[h] += w1[h * d + j] * xb[j];
        act[h] = pre[h].max(0.0);
        z += w2[h] * act[h];
      }
      if constexpr (WithLoss) {
        total += (z.max(0.0) + (-z.abs()).exp().log1p() - target * z) * mask;
      } else {
        total += z.abs() * mask;
      }
      // exp(-z) may overflow to inf, which still yields the correct limit 0.
      dz = ((1.0 + (-z).exp()).inverse() - target) * mask;
      gb2 += dz;
      for (std::size_t h = 0; h < hidden; ++h) {
        gw2[h] += dz * act[h];
        const double wh = w2[h];
        for (Eigen::Index k = 0; k < kBlock; ++k) dh(k) = pre[h](k) > 0.0 ? dz(k) * wh : 0.0;
        gb1[h] += dh;
        for (std::size_t j = 0; j < d; ++j) gw1[h * d + j] += dh * xb[j];
      }
    }
    const double inv_n = 1.0 / static_cast<double>(data.n);
    gradient.resize(theta.size());
    for (std::size_t k = 0; k < theta.size(); ++k) gradient[k] = partial[k].sum() * inv_n;
    return WithLoss ? total.sum() * inv_n : total.sum();
  }

  static NeuralNetModel fit_once(const Packed& data, const NeuralNetParams& params, std::uint64_t seed, double& final_loss) {
    NeuralNetModel model;
    model.dim_ = data.d;
    model.hidden_ = static_cast<std::size_t>(params.hidden_units);
    model.theta_ = initial_parameters(model.dim_, model.hidden_, params.init_range, seed, params.hidden_bias_init);
    std::vector<double> m(model.theta_.size(), 0.0), v(model.theta_.size(), 0.0), gradient;
    double beta1_t = 1.0, beta2_t = 1.0;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
      // A finite logit sum implies a finite loss; the loss itself is only needed at the end.
      if (!std::isfinite(accumulate<false>(model.theta_, data, model.hidden_, gradient))) {
        fail(ErrorCode::NonFiniteLoss, "neural net: loss diverged at epoch " + std::to_string(epoch));
      }
      beta1_t *= params.beta1;
      beta2_t *= params.beta2;
      for (std::size_t k = 0; k < model.theta_.size(); ++k) {
        const double g = gradient[k];
        m[k] = params.beta1 * m[k] + (1.0 - params.beta1) * g;
        v[k] = params.beta2 * v[k] + (1.0 - params.beta2) * g * g;
        const double m_hat = m[k] / (1.0 - beta1_t);
        const double v_hat = v[k] / (1.0 - beta2_t);
        model.theta_[k] -= params.learning_rate * m_hat / (std::sqrt(v_hat) + params.epsilon);
      }
    }
    std::vector<double> unused;
    final_loss = accumulate<true>(model.theta_, data, model.hidden_, unused);
    if (!std::isfinite(final_loss)) fail(ErrorCode::NonFiniteLoss, "neural net: loss diverged after training");
    return model;
  }

  std::size_t dim_ = 0;
  std::size_t hidden_ = 0;
  std::vector<double> theta_;
};

}  // namespace imblab
