#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "imblab/learners/common.hpp"
#include "imblab/random.hpp"

namespace imblab {

/// Bagged CART classification trees (Gini impurity) grown to purity. The
/// score is the fraction of trees whose leaf votes for class 1.
///
/// Splits send x <= t to the left child, where t is the largest left-child
/// training value. Tree structure therefore depends only on the rank order of
/// each feature column.
class ForestModel {
 public:
  /// Children of a split node sit at `left` and `left + 1`.
  struct Node {
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int16_t feature = -1;  // -1 marks a leaf
    bool vote = false;
  };
  using Tree = std::vector<Node>;

  static ForestModel fit(const LabeledDataset& train, const ForestParams& params, std::uint64_t seed) {
    detail::require_trainable(train, "random forest");
    if (params.trees < 1 || params.min_node_size < 1) fail(ErrorCode::InvalidArgument, "random forest: bad hyperparameters");
    ForestModel model;
    model.dim_ = train.dim();
    const std::size_t mtry = params.features_per_split > 0
                                 ? std::min<std::size_t>(static_cast<std::size_t>(params.features_per_split), model.dim_)
                                 : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(model.dim_)))));
    const Presorted presorted(train);
    Rng rng(seed);
    model.trees_.reserve(static_cast<std::size_t>(params.trees));
    for (int t = 0; t < params.trees; ++t) {
      Rng tree_rng = rng.split();
      model.trees_.push_back(grow(presorted, mtry, static_cast<std::size_t>(params.min_node_size), tree_rng));
    }
    return model;
  }

  std::vector<double> score(const Matrix& x) const {
    detail::require_width(x, dim_, "random forest");
    const std::size_t m = static_cast<std::size_t>(x.rows());
    std::vector<std::uint32_t> votes(m, 0);
    // Tree-major traversal keeps one tree hot in cache across all rows.
    for (const Tree& tree : trees_) {
      for (std::size_t i = 0; i < m; ++i) {
        const double* row = x.data() + i * dim_;
        const Node* node = tree.data();
        while (node->feature >= 0) {
          node = tree.data() + node->left + (row[node->feature] <= node->threshold ? 0 : 1);
        }
        votes[i] += node->vote;
      }
    }
    std::vector<double> out(m);
    const double inv = 1.0 / static_cast<double>(trees_.size());
    for (std::size_t i = 0; i < m; ++i) out[i] = static_cast<double>(votes[i]) * inv;
    return out;
  }

  std::size_t dim() const { return dim_; }
  const std::vector<Tree>& trees() const { return trees_; }

 private:
  /// Column-major copy of the training data with every column's row order.
  struct Presorted {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<std::vector<double>> columns;
    std::vector<std::vector<std::uint32_t>> order;
    std::vector<int> labels;

    explicit Presorted(const LabeledDataset& train)
        : n(train.size()), d(train.dim()), columns(d, std::vector<double>(n)), order(d, std::vector<std::uint32_t>(n)),
          labels(train.labels()) {
      for (std::size_t f = 0; f < d; ++f) {
        for (std::size_t i = 0; i < n; ++i) columns[f][i] = train.features()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f));
        std::iota(order[f].begin(), order[f].end(), 0U);
        const auto& col = columns[f];
        std::stable_sort(order[f].begin(), order[f].end(), [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
      }
    }
  };

  struct Work {
    int node;
    std::size_t begin;
    std::size_t end;
  };

  /// Bootstrap rows are kept once each with their multiplicity as a weight,
  /// which yields the same counts and candidate splits as materialized
  /// duplicates. Every node owns the same [begin, end) segment in each
  /// feature's sorted row list, kept sorted by stable partitioning.
  static Tree grow(const Presorted& data, std::size_t mtry, std::size_t min_node_size, Rng& rng) {
    const std::size_t n = data.n;
    const std::size_t d = data.d;

    std::vector<std::uint32_t> weight(n, 0);
    for (std::size_t k = 0; k < n; ++k) ++weight[rng.index(n)];
    // Class counts are integer sums, exact as doubles, so scans stay branch-free.
    std::vector<std::uint32_t> weight1(n);
    for (std::size_t r = 0; r < n; ++r) weight1[r] = data.labels[r] ? weight[r] : 0U;
    std::vector<std::vector<std::uint32_t>> segments(d);
    for (std::size_t f = 0; f < d; ++f) {
      segments[f].reserve(n);
      for (std::uint32_t r : data.order[f]) {
        if (weight[r] > 0) segments[f].push_back(r);
      }
    }
    const std::size_t unique = segments[0].size();

    Tree tree(1);
    std::vector<Work> stack{{0, 0, unique}};
    std::vector<std::size_t> features(d);
    std::vector<char> goes_left(n, 0);
    std::vector<std::uint32_t> scratch(unique);
    while (!stack.empty()) {
      const Work w = stack.back();
      stack.pop_back();
      std::uint64_t node_total = 0, node_ones = 0;
      for (std::size_t k = w.begin; k < w.end; ++k) {
        const std::uint32_t r = segments[0][k];
        node_total += weight[r];
        node_ones += weight1[r];
      }
      const auto total = static_cast<double>(node_total);
      const auto ones = static_cast<double>(node_ones);
      const double zeros = total - ones;
      tree[static_cast<std::size_t>(w.node)].vote = ones > zeros;
      if (ones == 0.0 || zeros == 0.0 || total <= static_cast<double>(min_node_size)) continue;

      std::iota(features.begin(), features.end(), std::size_t{0});
      rng.shuffle(features);
      double best = -1.0;
      int best_feature = -1;
      double best_threshold = 0.0;
      std::size_t informative = 0;
      for (std::size_t f : features) {
        if (informative == mtry) break;
        const auto& seg = segments[f];
        const auto& col = data.columns[f];
        if (col[seg[w.begin]] == col[seg[w.end - 1]]) continue;  // constant here; try another feature
        ++informative;
        std::uint64_t left_total = 0, left_ones = 0;
        double next = col[seg[w.begin]];
        for (std::size_t k = w.begin; k + 1 < w.end; ++k) {
          const std::uint32_t r = seg[k];
          left_total += weight[r];
          left_ones += weight1[r];
          const double value = next;
          next = col[seg[k + 1]];
          if (value == next) continue;
          const auto nl = static_cast<double>(left_total);
          const auto left1 = static_cast<double>(left_ones);
          const double left0 = nl - left1;
          const double nr = total - nl;
          const double right0 = zeros - left0, right1 = ones - left1;
          // Maximizing this sum minimizes the size-weighted Gini impurity of the children.
          const double purity = (left0 * left0 + left1 * left1) / nl + (right0 * right0 + right1 * right1) / nr;
          if (purity > best) {
            best = purity;
            best_feature = static_cast<int>(f);
            best_threshold = value;
          }
        }
      }
      if (best_feature < 0) continue;  // duplicated rows with mixed labels

      const auto& split_col = data.columns[static_cast<std::size_t>(best_feature)];
      std::size_t left_size = 0;
      for (std::size_t k = w.begin; k < w.end; ++k) {
        const std::uint32_t r = segments[0][k];
        goes_left[r] = split_col[r] <= best_threshold;
        left_size += static_cast<std::size_t>(goes_left[r]);
      }
      for (std::size_t f = 0; f < d; ++f) {
        auto& seg = segments[f];
        std::size_t l = w.begin, rcount = 0;
        // Branch-free stable partition; writes to seg never pass the read position.
        for (std::size_t k = w.begin; k < w.end; ++k) {
          const std::uint32_t r = seg[k];
          const std::size_t g = static_cast<std::size_t>(goes_left[r]);
          seg[l] = r;
          scratch[rcount] = r;
          l += g;
          rcount += 1 - g;
        }
        std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(rcount), seg.begin() + static_cast<std::ptrdiff_t>(l));
      }
      const std::size_t split = w.begin + left_size;
      const int left = static_cast<int>(tree.size());
      tree.resize(tree.size() + 2);
      Node& node = tree[static_cast<std::size_t>(w.node)];
      node.feature = static_cast<std::int16_t>(best_feature);
      node.threshold = best_threshold;
      node.left = left;
      stack.push_back({left + 1, split, w.end});
      stack.push_back({left, w.begin, split});
    }
    return tree;
  }

  std::size_t dim_ = 0;
  std::vector<Tree> trees_;
};

}  // namespace imblab
