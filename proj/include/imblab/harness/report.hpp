#pragma once

// SVG figures and best-combination tables from aggregated results.
//
// Per (example, paradigm, metric): one panel per learner, log2(IR) on the x
// axis, one polyline per resampler with +-1 stderr whiskers, and a CSV of
// the plotted points. best_combinations.csv picks, for each metric and IR,
// the (resampler, learner) pair with the lowest mean for risk, type1, type2
// and cost, and the highest mean for f0, f1, roc_auc, pr_auc0 and pr_auc1.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "imblab/harness/experiment.hpp"

namespace imblab {

namespace detail {

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Fixed-point text for SVG coordinates.
inline std::string fmt(double v, int digits = 2) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << (std::abs(v) < 0.5 * std::pow(10.0, -digits) ? 0.0 : v);
  return os.str();
}

/// Tick positions at a 1-2-5 step covering [lo, hi].
inline std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (span / step <= target) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) ticks.push_back(t);
  return ticks;
}

inline std::string tick_label(double v) {
  std::ostringstream os;
  os.precision(4);
  os << (std::abs(v) < 1e-12 ? 0.0 : v);
  return os.str();
}

inline constexpr std::array<const char*, 4> kSeriesColors = {"#1b6ca8", "#d1495b", "#2e933c", "#edae49"};

struct FigureKey {
  ExampleId example;
  Paradigm paradigm;
  std::string metric;
  auto tie() const { return std::make_tuple(static_cast<int>(example), static_cast<int>(paradigm), metric_rank(metric)); }
  bool operator<(const FigureKey& o) const { return tie() < o.tie(); }
  static std::size_t metric_rank(const std::string& m) {
    return static_cast<std::size_t>(std::find(kMetricNames.begin(), kMetricNames.end(), m) - kMetricNames.begin());
  }
};

inline std::string figure_stem(const FigureKey& key) {
  return std::string(to_string(key.example)) + "_" + std::string(to_string(key.paradigm)) + "_" + key.metric;
}

inline std::string render_svg(const FigureKey& key, const std::vector<const ResultRecord*>& rows) {
  std::vector<LearnerKind> learners;
  std::vector<ResampleKind> resamplers;
  for (const auto* r : rows) {
    if (std::find(learners.begin(), learners.end(), r->learner) == learners.end()) learners.push_back(r->learner);
    if (std::find(resamplers.begin(), resamplers.end(), r->resampler) == resamplers.end()) resamplers.push_back(r->resampler);
  }
  std::sort(learners.begin(), learners.end());
  std::sort(resamplers.begin(), resamplers.end());

  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (const auto* r : rows) {
    const double x = std::log2(r->ir);
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
    y_lo = std::min(y_lo, r->mean - r->std_error);
    y_hi = std::max(y_hi, r->mean + r->std_error);
  }
  if (x_hi - x_lo < 1e-12) {
    x_lo -= 1.0;
    x_hi += 1.0;
  }
  if (y_hi - y_lo < 1e-12) {
    const double pad = std::max(0.05, 0.1 * std::abs(y_lo));
    y_lo -= pad;
    y_hi += pad;
  } else {
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;
  }

  const double panel_w = 240, panel_h = 200, left = 60, top = 50, gap = 30, bottom = 80;
  const double width = left + static_cast<double>(learners.size()) * (panel_w + gap);
  const double height = top + panel_h + bottom;
  auto sx = [&](double x) { return (x - x_lo) / (x_hi - x_lo) * panel_w; };
  auto sy = [&](double y) { return panel_h - (y - y_lo) / (y_hi - y_lo) * panel_h; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(width, 0) << "\" height=\"" << fmt(height, 0)
      << "\" viewBox=\"0 0 " << fmt(width, 0) << ' ' << fmt(height, 0) << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << fmt(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(std::string(key.metric) + " (" + std::string(to_string(key.paradigm)) + ", " + std::string(to_string(key.example)) + ")")
      << "</text>\n";

  std::set<double> ir_values;
  for (const auto* r : rows) ir_values.insert(r->ir);
  const auto y_ticks = nice_ticks(y_lo, y_hi);

  for (std::size_t p = 0; p < learners.size(); ++p) {
    const double ox = left + static_cast<double>(p) * (panel_w + gap);
    svg << "<g transform=\"translate(" << fmt(ox) << ',' << fmt(top) << ")\">\n"
        << "<text x=\"" << fmt(panel_w / 2) << "\" y=\"-8\" text-anchor=\"middle\">" << xml_escape(to_string(learners[p])) << "</text>\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << fmt(panel_w) << "\" height=\"" << fmt(panel_h) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (double ir : ir_values) {
      const double x = sx(std::log2(ir));
      svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(panel_h) << "\" x2=\"" << fmt(x) << "\" y2=\"" << fmt(panel_h + 4)
          << "\" stroke=\"#444\"/>\n"
          << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(panel_h + 16) << "\" text-anchor=\"middle\">" << tick_label(std::log2(ir))
          << "</text>\n";
    }
    svg << "<text x=\"" << fmt(panel_w / 2) << "\" y=\"" << fmt(panel_h + 32) << "\" text-anchor=\"middle\">log2(IR)</text>\n";
    if (p == 0) {
      for (double t : y_ticks) {
        svg << "<line x1=\"-4\" y1=\"" << fmt(sy(t)) << "\" x2=\"0\" y2=\"" << fmt(sy(t)) << "\" stroke=\"#444\"/>\n"
            << "<text x=\"-6\" y=\"" << fmt(sy(t) + 4) << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
      }
    }
    for (std::size_t s = 0; s < resamplers.size(); ++s) {
      std::vector<const ResultRecord*> series;
      for (const auto* r : rows) {
        if (r->learner == learners[p] && r->resampler == resamplers[s]) series.push_back(r);
      }
      if (series.empty()) continue;
      std::sort(series.begin(), series.end(), [](const auto* a, const auto* b) { return a->ir < b->ir; });
      const char* color = kSeriesColors[static_cast<std::size_t>(resamplers[s]) % kSeriesColors.size()];
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < series.size(); ++i) {
        svg << (i ? " " : "") << fmt(sx(std::log2(series[i]->ir))) << ',' << fmt(sy(series[i]->mean));
      }
      svg << "\"/>\n";
      for (const auto* r : series) {
        const double x = sx(std::log2(r->ir));
        svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(sy(r->mean - r->std_error)) << "\" x2=\"" << fmt(x) << "\" y2=\""
            << fmt(sy(r->mean + r->std_error)) << "\" stroke=\"" << color << "\"/>\n"
            << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(sy(r->mean)) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
      }
    }
    svg << "</g>\n";
  }
  for (std::size_t s = 0; s < resamplers.size(); ++s) {
    const double lx = left + static_cast<double>(s) * 110.0;
    const double ly = top + panel_h + 60;
    const char* color = kSeriesColors[static_cast<std::size_t>(resamplers[s]) % kSeriesColors.size()];
    svg << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(lx + 24) << "\" y2=\"" << fmt(ly) << "\" stroke=\""
        << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << fmt(lx + 30) << "\" y=\"" << fmt(ly + 4) << "\">" << xml_escape(to_string(resamplers[s])) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace detail

/// Writes figures, their point tables and best_combinations.csv into
/// out_dir (created if missing). Returns the written paths in order.
inline std::vector<std::filesystem::path> render_report(const std::vector<ResultRecord>& records, const std::filesystem::path& out_dir) {
  if (records.empty()) fail(ErrorCode::NoData, "render_report: no records");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) fail(ErrorCode::IoError, "cannot create directory " + out_dir.string());

  std::map<detail::FigureKey, std::vector<const ResultRecord*>> figures;
  for (const auto& r : records) figures[{r.example, r.paradigm, r.metric}].push_back(&r);

  std::vector<std::filesystem::path> written;
  std::string best = "example,paradigm,metric,orientation,ir,resampler,learner,mean,stderr\n";
  for (auto& [key, rows] : figures) {
    std::sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) { return record_key_less(*a, *b); });
    const std::string stem = detail::figure_stem(key);

    const auto svg_path = out_dir / (stem + ".svg");
    detail::write_text_file(svg_path, detail::render_svg(key, rows));
    written.push_back(svg_path);

    std::string points = "learner,resampler,ir,log2_ir,mean,stderr,rep_count\n";
    for (const auto* r : rows) {
      points += std::string(to_string(r->learner)) + ',' + std::string(to_string(r->resampler)) + ',' + detail::format_double(r->ir) +
                ',' + detail::format_double(std::log2(r->ir)) + ',' + detail::format_double(r->mean) + ',' +
                detail::format_double(r->std_error) + ',' + std::to_string(r->rep_count) + '\n';
    }
    const auto csv_path = out_dir / (stem + ".csv");
    detail::write_text_file(csv_path, points);
    written.push_back(csv_path);

    const bool minimize = lower_is_better(key.metric);
    std::map<double, const ResultRecord*> winners;
    for (const auto* r : rows) {
      auto [it, inserted] = winners.try_emplace(r->ir, r);
      if (!inserted && (minimize ? r->mean < it->second->mean : r->mean > it->second->mean)) it->second = r;
    }
    for (const auto& [ir, r] : winners) {
      best += std::string(to_string(key.example)) + ',' + std::string(to_string(key.paradigm)) + ',' + key.metric + ',' +
              (minimize ? "min" : "max") + ',' + detail::format_double(ir) + ',' + std::string(to_string(r->resampler)) + ',' +
              std::string(to_string(r->learner)) + ',' + detail::format_double(r->mean) + ',' + detail::format_double(r->std_error) +
              '\n';
    }
  }
  const auto best_path = out_dir / "best_combinations.csv";
  detail::write_text_file(best_path, best);
  written.push_back(best_path);
  return written;
}

}  // namespace imblab
