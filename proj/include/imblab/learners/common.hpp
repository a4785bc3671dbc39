#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include "imblab/dataset.hpp"
#include "imblab/error.hpp"

namespace imblab {

enum class LearnerKind { LogisticRegression, NeuralNet, RandomForest, Svm, GradientBoostedTrees };

constexpr std::string_view to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::LogisticRegression: return "LR";
    case LearnerKind::NeuralNet: return "NN";
    case LearnerKind::RandomForest: return "RF";
    case LearnerKind::Svm: return "SVM";
    case LearnerKind::GradientBoostedTrees: return "XGB";
  }
  return "?";
}

struct LogisticParams {
  int max_iterations = 50;
  double tolerance = 1e-8;  // max absolute coefficient change
  double ridge = 1e-8;
};

struct NeuralNetParams {
  int hidden_units = 5;
  int epochs = 500;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double init_range = 0.5;        // weights start uniform on (-init_range, init_range)
  double hidden_bias_init = 0.1;  // hidden biases start here so no unit begins dead on a whole region
  int restarts = 3;               // independent initializations; the lowest final training loss wins
};

struct ForestParams {
  int trees = 200;
  int features_per_split = 0;  // 0 selects floor(sqrt(d))
  int min_node_size = 1;
};

struct SvmParams {
  double cost = 1.0;
  double gamma = 0.0;  // 0 selects 1/d
  double tolerance = 1e-3;
  long max_iterations = 10000;
  double cache_megabytes = 200.0;
};

struct BoostingParams {
  int rounds = 50;
  int max_depth = 6;
  double learning_rate = 0.3;
  double lambda = 1.0;            // L2 penalty on leaf weights
  double min_child_weight = 1.0;  // minimum hessian mass per child
};

struct Hyperparams {
  LogisticParams logistic;
  NeuralNetParams neural_net;
  ForestParams forest;
  SvmParams svm;
  BoostingParams boosting;
  std::uint64_t seed = 0;
};

namespace detail {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline void require_trainable(const LabeledDataset& train, const char* who) {
  train.require_both_classes(who);
  if (train.dim() == 0) fail(ErrorCode::DimensionMismatch, std::string(who) + ": no feature columns");
  if (!train.all_finite()) fail(ErrorCode::InvalidArgument, std::string(who) + ": non-finite feature values");
}

inline void require_width(const Matrix& x, std::size_t d, const char* who) {
  if (static_cast<std::size_t>(x.cols()) != d) {
    fail(ErrorCode::DimensionMismatch, std::string(who) + ": expected " + std::to_string(d) + " columns, got " +
                                           std::to_string(x.cols()));
  }
}

}  // namespace detail
}  // namespace imblab
