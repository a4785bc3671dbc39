#pragma once

// Common fit/score surface over the five scoring classifiers.

#include <algorithm>
#include <variant>
#include <vector>

#include "imblab/learners/boosting.hpp"
#include "imblab/learners/common.hpp"
#include "imblab/learners/logistic.hpp"
#include "imblab/learners/neural_net.hpp"
#include "imblab/learners/random_forest.hpp"
#include "imblab/learners/svm.hpp"

namespace imblab {

/// A fitted classifier whose scores estimate P(Y=1 | x). Immutable after fit.
class ScoringModel {
 public:
  using Fitted = std::variant<LogisticModel, NeuralNetModel, ForestModel, SvmModel, BoostedModel>;

  ScoringModel(LearnerKind kind, Fitted fitted) : kind_(kind), fitted_(std::move(fitted)) {}

  LearnerKind kind() const { return kind_; }
  std::size_t dim() const {
    return std::visit([](const auto& m) { return m.dim(); }, fitted_);
  }

  /// One score in [0, 1] per row. Values outside [0, 1] (or NaN) are clamped
  /// and counted in `clamped` when provided.
  std::vector<double> score(const Matrix& x, std::size_t* clamped = nullptr) const {
    auto out = std::visit([&](const auto& m) { return m.score(x); }, fitted_);
    std::size_t fixed = 0;
    for (double& s : out) {
      if (!(s >= 0.0 && s <= 1.0)) {
        ++fixed;
        s = std::isnan(s) ? 0.5 : std::clamp(s, 0.0, 1.0);
      }
    }
    if (clamped != nullptr) *clamped = fixed;
    return out;
  }

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&fitted_);
  }

 private:
  LearnerKind kind_;
  Fitted fitted_;
};

inline ScoringModel fit(LearnerKind kind, const LabeledDataset& train, const Hyperparams& hp) {
  train.require_both_classes("fit");
  switch (kind) {
    case LearnerKind::LogisticRegression: return {kind, LogisticModel::fit(train, hp.logistic)};
    case LearnerKind::NeuralNet: return {kind, NeuralNetModel::fit(train, hp.neural_net, hp.seed)};
    case LearnerKind::RandomForest: return {kind, ForestModel::fit(train, hp.forest, hp.seed)};
    case LearnerKind::Svm: return {kind, SvmModel::fit(train, hp.svm)};
    case LearnerKind::GradientBoostedTrees: return {kind, BoostedModel::fit(train, hp.boosting)};
  }
  fail(ErrorCode::InvalidArgument, "unknown learner kind");
}

inline std::vector<double> score(const ScoringModel& model, const Matrix& x) { return model.score(x); }

}  // namespace imblab
