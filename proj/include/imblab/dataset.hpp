#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "imblab/error.hpp"

namespace imblab {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;

/// Feature matrix with binary labels. Class 0 is the minority throughout.
class LabeledDataset {
 public:
  LabeledDataset() = default;

  LabeledDataset(Matrix features, Labels labels)
      : features_(std::move(features)), labels_(std::move(labels)) {
    if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
      fail(ErrorCode::LengthMismatch, "feature rows " + std::to_string(features_.rows()) +
                                          " != label count " + std::to_string(labels_.size()));
    }
    for (int y : labels_) {
      if (y != 0 && y != 1) fail(ErrorCode::InvalidLabel, "label " + std::to_string(y));
    }
  }

  const Matrix& features() const noexcept { return features_; }
  const Labels& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(features_.cols()); }

  std::size_t count(int cls) const {
    std::size_t c = 0;
    for (int y : labels_) c += (y == cls);
    return c;
  }

  /// Row indices of one class in ascending order.
  std::vector<std::size_t> rows_of(int cls) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] == cls) out.push_back(i);
    }
    return out;
  }

  LabeledDataset subset(std::span<const std::size_t> rows) const {
    Matrix x(static_cast<Eigen::Index>(rows.size()), features_.cols());
    Labels y(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      x.row(static_cast<Eigen::Index>(k)) = features_.row(static_cast<Eigen::Index>(rows[k]));
      y[k] = labels_[rows[k]];
    }
    return LabeledDataset(std::move(x), std::move(y));
  }

  /// Throws EmptyClass unless both classes are present.
  void require_both_classes(const char* context) const {
    if (count(0) == 0 || count(1) == 0) {
      fail(ErrorCode::EmptyClass, std::string(context) + ": n0=" + std::to_string(count(0)) +
                                      " n1=" + std::to_string(count(1)));
    }
  }

  bool all_finite() const { return features_.allFinite(); }

 private:
  Matrix features_;
  Labels labels_;
};

inline LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b) {
  if (a.size() == 0) return b;
  if (b.size() == 0) return a;
  if (a.dim() != b.dim()) fail(ErrorCode::DimensionMismatch, "concat of differing widths");
  Matrix x(static_cast<Eigen::Index>(a.size() + b.size()), a.features().cols());
  x.topRows(static_cast<Eigen::Index>(a.size())) = a.features();
  x.bottomRows(static_cast<Eigen::Index>(b.size())) = b.features();
  Labels y = a.labels();
  y.insert(y.end(), b.labels().begin(), b.labels().end());
  return LabeledDataset(std::move(x), std::move(y));
}

namespace detail {

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

inline double parse_double(std::string_view text, const std::string& context) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) fail(ErrorCode::ParseError, context + ": bad number '" + std::string(text) + "'");
  return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace detail

/// CSV with header `x1,...,xd,y`, one observation per row.
inline void write_dataset_csv(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  for (std::size_t j = 0; j < ds.dim(); ++j) out << 'x' << (j + 1) << ',';
  out << "y\n";
  const Matrix& x = ds.features();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.dim(); ++j) {
      out << detail::format_double(x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << ',';
    }
    out << ds.labels()[i] << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

inline LabeledDataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::ParseError, path + ": missing header");
  const auto header = detail::split_csv_line(line);
  if (header.size() < 2 || header.back() != "y") fail(ErrorCode::ParseError, path + ": header must end with y");
  const std::size_t d = header.size() - 1;
  for (std::size_t j = 0; j < d; ++j) {
    if (header[j] != "x" + std::to_string(j + 1)) fail(ErrorCode::ParseError, path + ": bad header column " + std::to_string(j + 1));
  }
  std::vector<double> values;
  Labels labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    const std::string ctx = path + ":" + std::to_string(line_no);
    if (cells.size() != d + 1) fail(ErrorCode::ParseError, ctx + ": expected " + std::to_string(d + 1) + " columns");
    for (std::size_t j = 0; j < d; ++j) values.push_back(detail::parse_double(cells[j], ctx));
    if (cells[d] == "0") {
      labels.push_back(0);
    } else if (cells[d] == "1") {
      labels.push_back(1);
    } else {
      fail(ErrorCode::InvalidLabel, ctx + ": label '" + std::string(cells[d]) + "'");
    }
  }
  Matrix x(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * d + j];
    }
  }
  return LabeledDataset(std::move(x), std::move(labels));
}

}  // namespace imblab
