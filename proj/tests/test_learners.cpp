#include <catch_amalgamated.hpp>

#include <algorithm>
#include <functional>
#include <numeric>

#include "imblab/datagen.hpp"
#include "imblab/learners.hpp"

using namespace imblab;

namespace {

constexpr LearnerKind kAllKinds[] = {LearnerKind::LogisticRegression, LearnerKind::NeuralNet, LearnerKind::RandomForest,
                                     LearnerKind::Svm, LearnerKind::GradientBoostedTrees};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an imblab::Error");
  return ErrorCode::NoData;
}

double accuracy(const std::vector<double>& scores, const Labels& y) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hit += (scores[i] > 0.5 ? 1 : 0) == y[i];
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

/// Four Gaussian blobs at (+-1, +-1); label 1 when the signs agree.
LabeledDataset xor_dataset(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(static_cast<Eigen::Index>(n), 2);
  Labels y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double sx = (i % 2 == 0) ? 1.0 : -1.0;
    const double sy = ((i / 2) % 2 == 0) ? 1.0 : -1.0;
    x(static_cast<Eigen::Index>(i), 0) = sx + 0.25 * rng.normal();
    x(static_cast<Eigen::Index>(i), 1) = sy + 0.25 * rng.normal();
    y[i] = sx * sy > 0 ? 1 : 0;
  }
  return LabeledDataset(std::move(x), std::move(y));
}

/// 20 points in the plane strictly separated by x1 + x2 = 0 with margin 0.2.
LabeledDataset separable_dataset() {
  Rng rng(21);
  Matrix x(20, 2);
  Labels y(20);
  for (int i = 0; i < 20; ++i) {
    const int label = i % 2;
    double a, b;
    do {
      a = rng.uniform(-2, 2);
      b = rng.uniform(-2, 2);
    } while ((label == 1 ? a + b : -(a + b)) < 0.2);
    x(i, 0) = a;
    x(i, 1) = b;
    y[static_cast<std::size_t>(i)] = label;
  }
  return LabeledDataset(std::move(x), std::move(y));
}

Hyperparams small_hp() {
  Hyperparams hp;
  hp.forest.trees = 50;
  hp.seed = 5;
  return hp;
}

}  // namespace

TEST_CASE("every learner rejects single-class data and wrong widths") {
  Matrix x(4, 2);
  x.setRandom();
  const LabeledDataset one_class(x, {1, 1, 1, 1});
  const auto ok = xor_dataset(40, 1);
  for (auto kind : kAllKinds) {
    CAPTURE(to_string(kind));
    CHECK(code_of([&] { fit(kind, one_class, small_hp()); }) == ErrorCode::EmptyClass);
    const auto model = fit(kind, ok, small_hp());
    CHECK(model.kind() == kind);
    CHECK(model.dim() == 2);
    CHECK(model.score(Matrix(0, 2)).empty());
    CHECK(code_of([&] { model.score(Matrix::Zero(3, 4)); }) == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("logistic regression separates a linearly separable set") {
  const auto ds = separable_dataset();
  // Oracle: the generating hyperplane x1 + x2 = 0 separates every point.
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double side = ds.features()(static_cast<Eigen::Index>(i), 0) + ds.features()(static_cast<Eigen::Index>(i), 1);
    REQUIRE((side > 0) == (ds.labels()[i] == 1));
  }
  const auto model = fit(LearnerKind::LogisticRegression, ds, {});
  CHECK(accuracy(model.score(ds.features()), ds.labels()) == 1.0);
}

TEST_CASE("logistic regression loss never increases") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto ds = make_dataset(trial % 2 ? ExampleId::Example1 : ExampleId::Example2, 1 + trial, 50, rng);
    const auto lr = LogisticModel::fit(ds, {});
    const auto& h = lr.loss_history();
    REQUIRE(h.size() >= 2);
    for (std::size_t i = 1; i < h.size(); ++i) REQUIRE(h[i] <= h[i - 1] + 1e-12 * std::abs(h[i - 1]));
  }
  const auto sep = LogisticModel::fit(separable_dataset(), {});
  for (std::size_t i = 1; i < sep.loss_history().size(); ++i) CHECK(sep.loss_history()[i] <= sep.loss_history()[i - 1]);
}

TEST_CASE("logistic regression on constant features returns the class proportion") {
  Matrix x = Matrix::Constant(40, 3, 2.5);
  Labels y(40, 0);
  std::fill(y.begin(), y.begin() + 13, 1);
  const auto model = fit(LearnerKind::LogisticRegression, LabeledDataset(x, y), {});
  for (double s : model.score(x)) CHECK(std::abs(s - 13.0 / 40.0) <= 1e-6);
}

TEST_CASE("XOR separates nonlinear learners from the linear one") {
  const auto ds = xor_dataset(200, 11);
  Hyperparams hp;
  hp.seed = 1;
  for (auto kind : {LearnerKind::NeuralNet, LearnerKind::RandomForest, LearnerKind::GradientBoostedTrees}) {
    CAPTURE(to_string(kind));
    CHECK(accuracy(fit(kind, ds, hp).score(ds.features()), ds.labels()) >= 0.95);
  }
  const auto lr = fit(LearnerKind::LogisticRegression, ds, hp);
  CHECK(accuracy(lr.score(ds.features()), ds.labels()) <= 0.6);
  // The fitted linear rule errs on at least one point of each XOR quadrant pair.
  const Vector& c = lr.as<LogisticModel>()->coefficients();
  const double corners[4][2] = {{1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
  int correct = 0;
  for (int q = 0; q < 4; ++q) {
    const bool predicted_one = c(0) + c(1) * corners[q][0] + c(2) * corners[q][1] > 0;
    correct += predicted_one == (q < 2);
  }
  CHECK(correct <= 3);
}

TEST_CASE("neural network restarts escape the dead-unit XOR basin") {
  for (std::uint64_t trial = 0; trial < 40; ++trial) {
    CAPTURE(trial);
    const auto ds = xor_dataset(200, 100 + trial);
    NeuralNetParams params;
    CHECK(accuracy(NeuralNetModel::fit(ds, params, trial).score(ds.features()), ds.labels()) >= 0.95);
  }
}

TEST_CASE("neural network keeps the restart with the lowest training loss") {
  const auto ds = xor_dataset(120, 5);
  auto loss_of = [&](const NeuralNetModel& m) {
    return NeuralNetModel::loss_and_gradient(m.parameters(), ds.features(), ds.labels(), 5).loss;
  };
  NeuralNetParams one;
  one.restarts = 1;
  NeuralNetParams three;
  three.restarts = 3;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const double best = loss_of(NeuralNetModel::fit(ds, three, seed));
    // The first restart of a multi-restart fit is the single-restart fit.
    CHECK(best <= loss_of(NeuralNetModel::fit(ds, one, seed)));
  }
  NeuralNetParams bad;
  bad.restarts = 0;
  CHECK_THROWS_AS(NeuralNetModel::fit(ds, bad, 1), Error);
}

TEST_CASE("neural network gradient matches central differences") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix x(10, 5);
    Labels y(10);
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 5; ++j) x(i, j) = rng.normal();
      y[static_cast<std::size_t>(i)] = static_cast<int>(rng.index(2));
    }
    const std::size_t hidden = 5;
    auto theta = NeuralNetModel::initial_parameters(5, hidden, 0.5, 1000 + static_cast<std::uint64_t>(trial));
    const auto exact = NeuralNetModel::loss_and_gradient(theta, x, y, hidden);
    REQUIRE(exact.gradient.size() == NeuralNetModel::parameter_count(5, hidden));
    const double h = 1e-5;
    for (std::size_t p = 0; p < theta.size(); ++p) {
      auto plus = theta, minus = theta;
      plus[p] += h;
      minus[p] -= h;
      const double fd = (NeuralNetModel::loss_and_gradient(plus, x, y, hidden).loss -
                         NeuralNetModel::loss_and_gradient(minus, x, y, hidden).loss) /
                        (2 * h);
      const double g = exact.gradient[p];
      const double rel = std::abs(fd - g) / std::max({std::abs(fd), std::abs(g), 1e-6});
      // Kinks of ReLU at exactly zero pre-activation are measure-zero here.
      REQUIRE(rel <= 1e-4);
    }
  }
}

TEST_CASE("tree ensembles are invariant to monotone feature transforms") {
  Rng rng(23);
  const auto ds = make_dataset(ExampleId::Example2, 2, 60, rng);
  const auto probe = make_dataset(ExampleId::Example2, 1, 50, rng);
  auto transform = [](Matrix m) {
    m.col(0) = m.col(0).array().exp();
    m.col(2) = (3.0 * m.col(2).array() - 7.0).cube();
    m.col(4) = m.col(4).array().unaryExpr([](double v) { return std::atan(v); });
    return m;
  };
  const LabeledDataset moved(transform(ds.features()), ds.labels());
  const Matrix probe_moved = transform(probe.features());
  Hyperparams hp = small_hp();
  for (auto kind : {LearnerKind::RandomForest, LearnerKind::GradientBoostedTrees}) {
    CAPTURE(to_string(kind));
    const auto a = fit(kind, ds, hp).score(ds.features());
    const auto b = fit(kind, moved, hp).score(moved.features());
    CHECK(a == b);
    // Off-sample points agree too because thresholds sit on observed values.
    CHECK(fit(kind, ds, hp).score(probe.features()) == fit(kind, moved, hp).score(probe_moved));
  }
}

TEST_CASE("learners rank Example 1 classes correctly and rarely clamp") {
  Rng rng(29);
  const auto train = make_dataset(ExampleId::Example1, 1, 200, rng);
  const auto fresh = make_dataset(ExampleId::Example1, 1, 100, rng);
  const auto big = make_dataset(ExampleId::Example1, 4, 1000, rng);
  for (auto kind : kAllKinds) {
    CAPTURE(to_string(kind));
    const auto model = fit(kind, train, small_hp());
    const auto s = model.score(fresh.features());
    double m0 = 0, m1 = 0;
    for (std::size_t i = 0; i < s.size(); ++i) (fresh.labels()[i] ? m1 : m0) += s[i];
    CHECK(m1 / 100.0 > m0 / 100.0 + 0.3);
    std::size_t clamped = 0;
    const auto sb = model.score(big.features(), &clamped);
    CHECK(static_cast<double>(clamped) < 0.001 * static_cast<double>(sb.size()));
    for (double v : sb) REQUIRE(std::isfinite(v));
  }
}

TEST_CASE("fits are deterministic") {
  Rng rng(31);
  const auto train = make_dataset(ExampleId::Example2, 3, 60, rng);
  for (auto kind : kAllKinds) {
    CAPTURE(to_string(kind));
    CHECK(fit(kind, train, small_hp()).score(train.features()) == fit(kind, train, small_hp()).score(train.features()));
  }
}

TEST_CASE("svm solver converges on small data and Platt scores are monotone") {
  Rng rng(37);
  const auto train = make_dataset(ExampleId::Example1, 2, 100, rng);
  const auto model = fit(LearnerKind::Svm, train, {});
  const auto* svm = model.as<SvmModel>();
  REQUIRE(svm != nullptr);
  CHECK(svm->report().converged);
  CHECK(svm->report().support_vectors > 0);
  CHECK(svm->platt_a() < 0.0);
  const auto f = svm->decision_values(train.features());
  const auto s = svm->score(train.features());
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t j = 0; j < f.size(); j += 7) {
      if (f[i] < f[j]) REQUIRE(s[i] <= s[j]);
    }
  }
}

TEST_CASE("neural network reports divergence") {
  Hyperparams hp;
  hp.neural_net.learning_rate = 1e300;
  hp.neural_net.init_range = 1e300;
  Rng rng(41);
  const auto ds = make_dataset(ExampleId::Example1, 1, 20, rng);
  CHECK(code_of([&] { fit(LearnerKind::NeuralNet, ds, hp); }) == ErrorCode::NonFiniteLoss);
}
