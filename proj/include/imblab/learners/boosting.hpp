#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "imblab/learners/common.hpp"

namespace imblab {

/// Second-order gradient boosting on the logistic loss with exact greedy,
/// level-wise tree growth. Leaf weights are -G / (H + lambda) scaled by the
/// learning rate; the score is the sigmoid of the summed leaf weights.
class BoostedModel {
 public:
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  using Tree = std::vector<Node>;

  static BoostedModel fit(const LabeledDataset& train, const BoostingParams& params) {
    detail::require_trainable(train, "gradient boosting");
    if (params.rounds < 1 || params.max_depth < 1 || !(params.learning_rate > 0.0) || !(params.lambda >= 0.0)) {
      fail(ErrorCode::InvalidArgument, "gradient boosting: bad hyperparameters");
    }
    const Matrix& x = train.features();
    const std::size_t n = train.size();
    const std::size_t d = train.dim();

    std::vector<SortedColumn> sorted(d);
    for (std::size_t f = 0; f < d; ++f) {
      auto& order = sorted[f].rows;
      order.resize(n);
      std::iota(order.begin(), order.end(), std::uint32_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return x(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(f)) < x(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(f));
      });
      sorted[f].values.resize(n);
      for (std::size_t k = 0; k < n; ++k) sorted[f].values[k] = x(static_cast<Eigen::Index>(order[k]), static_cast<Eigen::Index>(f));
    }

    BoostedModel model;
    model.dim_ = d;
    std::vector<double> margin(n, 0.0), grad(n), hess(n);
    std::vector<int> leaf_of(n);
    for (int round = 0; round < params.rounds; ++round) {
      for (std::size_t i = 0; i < n; ++i) {
        const double p = detail::sigmoid(margin[i]);
        grad[i] = p - train.labels()[i];
        hess[i] = p * (1.0 - p);
      }
      Tree tree = grow(x, sorted, grad, hess, params, leaf_of);
      for (std::size_t i = 0; i < n; ++i) margin[i] += tree[static_cast<std::size_t>(leaf_of[i])].value;
      model.trees_.push_back(std::move(tree));
    }
    return model;
  }

  /// Summed leaf weights (log-odds) per row.
  std::vector<double> margin(const Matrix& x) const {
    detail::require_width(x, dim_, "gradient boosting");
    std::vector<double> out(static_cast<std::size_t>(x.rows()), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double* row = x.data() + i * dim_;
      double s = 0.0;
      for (const Tree& tree : trees_) {
        const Node* node = &tree[0];
        while (node->feature >= 0) {
          node = &tree[static_cast<std::size_t>(row[node->feature] <= node->threshold ? node->left : node->right)];
        }
        s += node->value;
      }
      out[i] = s;
    }
    return out;
  }

  std::vector<double> score(const Matrix& x) const {
    auto out = margin(x);
    for (double& v : out) v = detail::sigmoid(v);
    return out;
  }

  std::size_t dim() const { return dim_; }
  const std::vector<Tree>& trees() const { return trees_; }

 private:
  struct SortedColumn {
    std::vector<std::uint32_t> rows;
    std::vector<double> values;
  };

  struct Candidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
  };

  static constexpr double kMinGain = 1e-6;

  static double structure_score(double g, double h, double lambda) { return g * g / (h + lambda); }

  static Tree grow(const Matrix& x, const std::vector<SortedColumn>& sorted, const std::vector<double>& grad,
                   const std::vector<double>& hess, const BoostingParams& params, std::vector<int>& position) {
    const std::size_t n = grad.size();
    Tree tree(1);
    std::vector<double> sum_g{std::accumulate(grad.begin(), grad.end(), 0.0)};
    std::vector<double> sum_h{std::accumulate(hess.begin(), hess.end(), 0.0)};
    std::fill(position.begin(), position.end(), 0);
    std::vector<int> frontier{0};

    for (int depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
      const std::size_t nodes = tree.size();
      std::vector<char> open(nodes, 0);
      for (int node : frontier) open[static_cast<std::size_t>(node)] = 1;
      std::vector<Candidate> best(nodes);
      std::vector<double> left_g(nodes), left_h(nodes), last(nodes), parent_score(nodes);
      std::vector<char> seen(nodes);
      for (int node : frontier) {
        const auto k = static_cast<std::size_t>(node);
        parent_score[k] = structure_score(sum_g[k], sum_h[k], params.lambda);
      }

      for (std::size_t f = 0; f < sorted.size(); ++f) {
        std::fill(left_g.begin(), left_g.end(), 0.0);
        std::fill(left_h.begin(), left_h.end(), 0.0);
        std::fill(seen.begin(), seen.end(), 0);
        const auto& rows = sorted[f].rows;
        const auto& values = sorted[f].values;
        for (std::size_t k = 0; k < rows.size(); ++k) {
          const std::uint32_t i = rows[k];
          const auto node = static_cast<std::size_t>(position[i]);
          if (!open[node]) continue;
          const double v = values[k];
          if (seen[node] && v != last[node]) {
            const double gl = left_g[node], hl = left_h[node];
            const double gr = sum_g[node] - gl, hr = sum_h[node] - hl;
            if (hl >= params.min_child_weight && hr >= params.min_child_weight) {
              const double gain =
                  structure_score(gl, hl, params.lambda) + structure_score(gr, hr, params.lambda) - parent_score[node];
              if (gain > best[node].gain) best[node] = {gain, static_cast<int>(f), last[node]};
            }
          }
          seen[node] = 1;
          last[node] = v;
          left_g[node] += grad[i];
          left_h[node] += hess[i];
        }
      }

      std::vector<int> next;
      for (int node : frontier) {
        const Candidate& c = best[static_cast<std::size_t>(node)];
        if (c.feature < 0 || !(c.gain > kMinGain)) continue;
        const int left = static_cast<int>(tree.size());
        tree.resize(tree.size() + 2);
        sum_g.resize(tree.size(), 0.0);
        sum_h.resize(tree.size(), 0.0);
        Node& parent = tree[static_cast<std::size_t>(node)];
        parent.feature = c.feature;
        parent.threshold = c.threshold;
        parent.left = left;
        parent.right = left + 1;
        next.push_back(left);
        next.push_back(left + 1);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const Node& node = tree[static_cast<std::size_t>(position[i])];
        if (node.feature < 0) continue;
        const double v = x(static_cast<Eigen::Index>(i), node.feature);
        position[i] = v <= node.threshold ? node.left : node.right;
        sum_g[static_cast<std::size_t>(position[i])] += grad[i];
        sum_h[static_cast<std::size_t>(position[i])] += hess[i];
      }
      frontier = std::move(next);
    }

    for (std::size_t k = 0; k < tree.size(); ++k) {
      if (tree[k].feature < 0) tree[k].value = -params.learning_rate * sum_g[k] / (sum_h[k] + params.lambda);
    }
    return tree;
  }

  std::size_t dim_ = 0;
  std::vector<Tree> trees_;
};

}  // namespace imblab
