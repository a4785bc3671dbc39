#pragma once

// Class rebalancing: random under/oversampling, SMOTE and the hybrid scheme.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string_view>
#include <vector>

#include "imblab/dataset.hpp"
#include "imblab/error.hpp"
#include "imblab/random.hpp"

namespace imblab {

enum class ResampleKind { Original, Under, Smote, Hybrid };

constexpr std::string_view to_string(ResampleKind kind) {
  switch (kind) {
    case ResampleKind::Original: return "Original";
    case ResampleKind::Under: return "Under";
    case ResampleKind::Smote: return "SMOTE";
    case ResampleKind::Hybrid: return "Hybrid";
  }
  return "?";
}

enum class GapMode {
  ScalarPerPoint,  // one r per synthetic point: a point on the segment
  PerCoordinate,   // one r per coordinate: a point in the spanned box
};

struct SmoteParams {
  std::size_t k_neighbors = 5;
  GapMode gap_mode = GapMode::ScalarPerPoint;
};

/// Side information a resampler may report back to the harness.
struct ResampleNotes {
  bool k_clamped = false;
  std::size_t k_used = 0;
};

namespace detail {

inline void require_resamplable(const LabeledDataset& ds, const char* what) {
  ds.require_both_classes(what);
  if (ds.count(1) < ds.count(0)) {
    fail(ErrorCode::InvalidArgument, std::string(what) + ": class 0 must be the minority (n0 <= n1)");
  }
}

/// k nearest minority neighbors of each minority point (excluding itself),
/// by Euclidean distance with ties broken by lower row index.
inline std::vector<std::vector<std::size_t>> minority_neighbors(const Matrix& minority, std::size_t k) {
  const std::size_t n = static_cast<std::size_t>(minority.rows());
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dist.emplace_back((minority.row(static_cast<Eigen::Index>(i)) - minority.row(static_cast<Eigen::Index>(j))).squaredNorm(), j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    out[i].reserve(k);
    for (std::size_t t = 0; t < k; ++t) out[i].push_back(dist[t].second);
  }
  return out;
}

/// Pick `count` distinct rows out of `rows` without replacement, preserving
/// their original relative order.
inline std::vector<std::size_t> sample_without_replacement(const std::vector<std::size_t>& rows, std::size_t count, Rng& rng) {
  std::vector<std::size_t> pick = rows;
  // Partial Fisher-Yates: the first `count` slots become the sample.
  for (std::size_t i = 0; i < count; ++i) std::swap(pick[i], pick[i + rng.index(pick.size() - i)]);
  pick.resize(count);
  std::sort(pick.begin(), pick.end());
  return pick;
}

}  // namespace detail

/// Keeps every minority row and n0 majority rows drawn without replacement.
inline LabeledDataset undersample(const LabeledDataset& ds, Rng& rng) {
  detail::require_resamplable(ds, "undersample");
  const auto minority = ds.rows_of(0);
  const auto kept = detail::sample_without_replacement(ds.rows_of(1), minority.size(), rng);
  std::vector<std::size_t> rows = minority;
  rows.insert(rows.end(), kept.begin(), kept.end());
  return ds.subset(rows);
}

/// Appends n1 - n0 minority rows drawn with replacement.
inline LabeledDataset oversample_random(const LabeledDataset& ds, Rng& rng) {
  detail::require_resamplable(ds, "oversample_random");
  const auto minority = ds.rows_of(0);
  const std::size_t extra = ds.count(1) - minority.size();
  std::vector<std::size_t> rows(ds.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  for (std::size_t i = 0; i < extra; ++i) rows.push_back(minority[rng.index(minority.size())]);
  return ds.subset(rows);
}

/// Grows the minority class to `target_minority` rows with synthetic points
/// x + r (x' - x), x' one of the k nearest minority neighbors of x. Minority
/// points are visited in one random order, cyclically, one synthetic point per
/// visit. Synthetic rows are appended after the original rows.
inline LabeledDataset smote(const LabeledDataset& ds, const SmoteParams& params, std::size_t target_minority, Rng& rng,
                            ResampleNotes* notes = nullptr) {
  ds.require_both_classes("smote");
  if (params.k_neighbors < 1) fail(ErrorCode::InvalidArgument, "smote: k_neighbors must be >= 1");
  const auto minority_rows = ds.rows_of(0);
  const std::size_t n0 = minority_rows.size();
  if (n0 < 2) fail(ErrorCode::DegenerateMinority, "smote: need at least two minority points, have " + std::to_string(n0));
  if (target_minority < n0) fail(ErrorCode::InvalidArgument, "smote: target below current minority size");

  const std::size_t k = std::min(params.k_neighbors, n0 - 1);
  if (notes != nullptr) {
    notes->k_clamped = k < params.k_neighbors;
    notes->k_used = k;
  }
  const std::size_t synthetic = target_minority - n0;
  if (synthetic == 0) return ds;

  const Matrix minority = ds.subset(minority_rows).features();
  const auto neighbors = detail::minority_neighbors(minority, k);
  std::vector<std::size_t> order(n0);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);

  const Eigen::Index d = minority.cols();
  Matrix x(static_cast<Eigen::Index>(ds.size() + synthetic), d);
  x.topRows(static_cast<Eigen::Index>(ds.size())) = ds.features();
  Labels y = ds.labels();
  y.resize(ds.size() + synthetic, 0);
  for (std::size_t s = 0; s < synthetic; ++s) {
    const std::size_t i = order[s % n0];
    const std::size_t nb = neighbors[i][rng.index(k)];
    const auto base = minority.row(static_cast<Eigen::Index>(i));
    const auto gap = minority.row(static_cast<Eigen::Index>(nb)) - base;
    auto out = x.row(static_cast<Eigen::Index>(ds.size() + s));
    if (params.gap_mode == GapMode::ScalarPerPoint) {
      out = base + rng.uniform() * gap;
    } else {
      for (Eigen::Index j = 0; j < d; ++j) out(j) = base(j) + rng.uniform() * gap(j);
    }
  }
  return LabeledDataset(std::move(x), std::move(y));
}

/// Common size for the hybrid scheme: floor(sqrt(n0 n1) / n0) n0, computed in
/// integers as the largest multiple m n0 with m^2 n0 <= n1.
inline std::size_t hybrid_size(std::size_t n0, std::size_t n1) {
  if (n0 == 0) fail(ErrorCode::EmptyClass, "hybrid_size: empty minority");
  std::size_t m = static_cast<std::size_t>(std::sqrt(static_cast<double>(n1) / static_cast<double>(n0)));
  while (m > 0 && m * m * n0 > n1) --m;
  while ((m + 1) * (m + 1) * n0 <= n1) ++m;
  return m * n0;
}

/// Undersample the majority to n_h, then SMOTE the minority up to n_h.
inline LabeledDataset hybrid(const LabeledDataset& ds, const SmoteParams& params, Rng& rng, ResampleNotes* notes = nullptr) {
  detail::require_resamplable(ds, "hybrid");
  const std::size_t n0 = ds.count(0);
  if (n0 < 2) fail(ErrorCode::DegenerateMinority, "hybrid: need at least two minority points");
  const std::size_t target = hybrid_size(n0, ds.count(1));
  const auto minority = ds.rows_of(0);
  const auto kept = detail::sample_without_replacement(ds.rows_of(1), target, rng);
  std::vector<std::size_t> rows = minority;
  rows.insert(rows.end(), kept.begin(), kept.end());
  return smote(ds.subset(rows), params, target, rng, notes);
}

/// Dispatch on kind. SMOTE alone balances to n1.
inline LabeledDataset resample(ResampleKind kind, const LabeledDataset& ds, const SmoteParams& params, Rng& rng,
                               ResampleNotes* notes = nullptr) {
  switch (kind) {
    case ResampleKind::Original: return ds;
    case ResampleKind::Under: return undersample(ds, rng);
    case ResampleKind::Smote:
      detail::require_resamplable(ds, "smote");
      return smote(ds, params, ds.count(1), rng, notes);
    case ResampleKind::Hybrid: return hybrid(ds, params, rng, notes);
  }
  return ds;
}

}  // namespace imblab
