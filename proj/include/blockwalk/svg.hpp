#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "blockwalk/common.hpp"

namespace blockwalk {

// Static SVG plots: a fixed 640x420 canvas, linear axes, no external
// resources. Enough for the experiment figures, not a charting library.

struct PlotSeries {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
};

struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
  int group = 0;
};

namespace detail {

constexpr double kPlotWidth = 640.0;
constexpr double kPlotHeight = 420.0;
constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 34.0;
constexpr double kMarginBottom = 46.0;

inline const char* plot_color(int group) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return palette[((group % 8) + 8) % 8];
}

inline std::string plot_number(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4g", v);
  return buffer;
}

struct PlotScale {
  double lo = 0.0;
  double hi = 1.0;
  double pixel_lo = 0.0;
  double pixel_hi = 1.0;

  double map(double v) const {
    return pixel_lo + (v - lo) / (hi - lo) * (pixel_hi - pixel_lo);
  }
};

inline PlotScale make_scale(double lo, double hi, double pixel_lo,
                            double pixel_hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw ValidationError("svg: non-finite plot data");
  if (lo == hi) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.5;
    lo -= pad;
    hi += pad;
  } else {
    const double pad = (hi - lo) * 0.05;
    lo -= pad;
    hi += pad;
  }
  return {lo, hi, pixel_lo, pixel_hi};
}

inline void plot_header(std::ofstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kPlotWidth
      << "\" height=\"" << kPlotHeight << "\" viewBox=\"0 0 " << kPlotWidth
      << ' ' << kPlotHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kPlotWidth / 2
      << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">"
      << title << "</text>\n";
}

inline void plot_axes(std::ofstream& out, const PlotScale& x,
                      const PlotScale& y, const std::string& x_label,
                      const std::string& y_label) {
  const double left = kMarginLeft;
  const double right = kPlotWidth - kMarginRight;
  const double top = kMarginTop;
  const double bottom = kPlotHeight - kMarginBottom;
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\""
      << right - left << "\" height=\"" << bottom - top
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int tick = 0; tick <= 5; ++tick) {
    const double xv = x.lo + (x.hi - x.lo) * tick / 5.0;
    const double yv = y.lo + (y.hi - y.lo) * tick / 5.0;
    const double xp = x.map(xv);
    const double yp = y.map(yv);
    out << "<line x1=\"" << xp << "\" y1=\"" << bottom << "\" x2=\"" << xp
        << "\" y2=\"" << bottom + 4 << "\" stroke=\"#444\"/>\n"
        << "<text x=\"" << xp << "\" y=\"" << bottom + 17
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"10\">"
        << plot_number(xv) << "</text>\n"
        << "<line x1=\"" << left - 4 << "\" y1=\"" << yp << "\" x2=\"" << left
        << "\" y2=\"" << yp << "\" stroke=\"#444\"/>\n"
        << "<text x=\"" << left - 7 << "\" y=\"" << yp + 3
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"10\">"
        << plot_number(yv) << "</text>\n";
  }
  out << "<text x=\"" << (left + right) / 2 << "\" y=\"" << kPlotHeight - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">"
      << x_label << "</text>\n"
      << "<text x=\"14\" y=\"" << (top + bottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 14 "
      << (top + bottom) / 2 << ")\">" << y_label << "</text>\n";
}

inline void plot_legend(std::ofstream& out,
                        const std::vector<std::string>& labels) {
  const double right = kPlotWidth - kMarginRight;
  double ypos = kMarginTop + 14.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].empty()) continue;
    out << "<rect x=\"" << right - 120 << "\" y=\"" << ypos - 8
        << "\" width=\"10\" height=\"10\" fill=\""
        << plot_color(static_cast<int>(i)) << "\"/>\n"
        << "<text x=\"" << right - 106 << "\" y=\"" << ypos + 1
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << labels[i]
        << "</text>\n";
    ypos += 15.0;
  }
}

}  // namespace detail

inline void write_line_plot(const std::vector<PlotSeries>& series,
                            const std::string& title,
                            const std::string& x_label,
                            const std::string& y_label,
                            const std::string& path) {
  if (series.empty()) throw ValidationError("svg: no series to plot");
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  for (const PlotSeries& s : series) {
    if (s.xs.size() != s.ys.size() || s.xs.empty())
      throw ValidationError("svg: series sizes are inconsistent");
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      x_lo = std::min(x_lo, s.xs[i]);
      x_hi = std::max(x_hi, s.xs[i]);
      y_lo = std::min(y_lo, s.ys[i]);
      y_hi = std::max(y_hi, s.ys[i]);
    }
  }
  const detail::PlotScale x = detail::make_scale(
      x_lo, x_hi, detail::kMarginLeft, detail::kPlotWidth - detail::kMarginRight);
  const detail::PlotScale y =
      detail::make_scale(y_lo, y_hi, detail::kPlotHeight - detail::kMarginBottom,
                         detail::kMarginTop);
  std::ofstream out(path);
  if (!out) throw IoError("svg: cannot open for writing: " + path);
  detail::plot_header(out, title);
  detail::plot_axes(out, x, y, x_label, y_label);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < series.size(); ++i) {
    labels.push_back(series[i].label);
    out << "<polyline fill=\"none\" stroke=\""
        << detail::plot_color(static_cast<int>(i))
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t j = 0; j < series[i].xs.size(); ++j)
      out << x.map(series[i].xs[j]) << ',' << y.map(series[i].ys[j]) << ' ';
    out << "\"/>\n";
  }
  detail::plot_legend(out, labels);
  out << "</svg>\n";
  if (!out.good()) throw IoError("svg: write failed: " + path);
}

inline void write_scatter_plot(const std::vector<PlotPoint>& points,
                               const std::vector<std::string>& group_labels,
                               const std::string& title,
                               const std::string& x_label,
                               const std::string& y_label,
                               const std::string& path) {
  if (points.empty()) throw ValidationError("svg: no points to plot");
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  for (const PlotPoint& p : points) {
    x_lo = std::min(x_lo, p.x);
    x_hi = std::max(x_hi, p.x);
    y_lo = std::min(y_lo, p.y);
    y_hi = std::max(y_hi, p.y);
  }
  const detail::PlotScale x = detail::make_scale(
      x_lo, x_hi, detail::kMarginLeft, detail::kPlotWidth - detail::kMarginRight);
  const detail::PlotScale y =
      detail::make_scale(y_lo, y_hi, detail::kPlotHeight - detail::kMarginBottom,
                         detail::kMarginTop);
  std::ofstream out(path);
  if (!out) throw IoError("svg: cannot open for writing: " + path);
  detail::plot_header(out, title);
  detail::plot_axes(out, x, y, x_label, y_label);
  for (const PlotPoint& p : points)
    out << "<circle cx=\"" << x.map(p.x) << "\" cy=\"" << y.map(p.y)
        << "\" r=\"2.5\" fill=\"" << detail::plot_color(p.group)
        << "\" fill-opacity=\"0.7\"/>\n";
  detail::plot_legend(out, group_labels);
  out << "</svg>\n";
  if (!out.good()) throw IoError("svg: write failed: " + path);
}

}  // namespace blockwalk
