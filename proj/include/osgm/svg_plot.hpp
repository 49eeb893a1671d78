#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "osgm/solvers.hpp"

namespace osgm {

struct PlotSeries {
  std::string label;
  std::vector<TraceRecord> trace;
};

struct PlotOptions {
  int width = 720;
  int height = 480;
  std::string title = "f gap";
  double min_gap = 1e-16;  // gaps below this are clamped before taking log10
};

namespace detail {

inline std::string svg_escape(const std::string& s) {
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

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return colors[i % 10];
}

}  // namespace detail

/// Static SVG 1.1 plot of log10(f gap) against iteration, one polyline per
/// series. Rows with a non-finite gap are skipped.
inline std::string render_svg(const std::vector<PlotSeries>& series, const PlotOptions& opt = {}) {
  const double left = 70, right = 160, top = 40, bottom = 50;
  const double pw = opt.width - left - right;
  const double ph = opt.height - top - bottom;

  double x_max = 1.0;
  double y_lo = std::numeric_limits<double>::infinity();
  double y_hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : series)
    for (const auto& r : s.trace) {
      if (!std::isfinite(r.f_gap)) continue;
      const double y = std::log10(std::max(r.f_gap, opt.min_gap));
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
      x_max = std::max(x_max, static_cast<double>(r.iter));
    }
  if (!std::isfinite(y_lo)) {
    y_lo = -1.0;
    y_hi = 1.0;
  }
  y_lo = std::floor(y_lo);
  y_hi = std::ceil(y_hi);
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;

  auto px = [&](double it) { return left + pw * (it - 1.0) / std::max(x_max - 1.0, 1.0); };
  auto py = [&](double y) { return top + ph * (y_hi - y) / (y_hi - y_lo); };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(opt.width) + "\" height=\"" + std::to_string(opt.height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + detail::fmt(left + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" " +
         "font-family=\"sans-serif\" font-size=\"16\">" + detail::svg_escape(opt.title) + "</text>\n";

  // Axes and ticks.
  svg += "<g stroke=\"black\" fill=\"none\">\n";
  svg += "<rect x=\"" + detail::fmt(left) + "\" y=\"" + detail::fmt(top) + "\" width=\"" +
         detail::fmt(pw) + "\" height=\"" + detail::fmt(ph) + "\"/>\n";
  svg += "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  const int y_step = std::max(1, static_cast<int>(std::ceil((y_hi - y_lo) / 10.0)));
  for (double y = y_lo; y <= y_hi + 1e-9; y += y_step) {
    svg += "<line x1=\"" + detail::fmt(left) + "\" x2=\"" + detail::fmt(left + pw) + "\" y1=\"" +
           detail::fmt(py(y)) + "\" y2=\"" + detail::fmt(py(y)) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + detail::fmt(left - 6) + "\" y=\"" + detail::fmt(py(y) + 4) +
           "\" text-anchor=\"end\">1e" + std::to_string(static_cast<int>(y)) + "</text>\n";
  }
  for (int t = 0; t <= 5; ++t) {
    const double it = 1.0 + (x_max - 1.0) * t / 5.0;
    svg += "<text x=\"" + detail::fmt(px(it)) + "\" y=\"" + detail::fmt(top + ph + 16) +
           "\" text-anchor=\"middle\">" + std::to_string(static_cast<long>(std::lround(it))) +
           "</text>\n";
  }
  svg += "<text x=\"" + detail::fmt(left + pw / 2) + "\" y=\"" + detail::fmt(opt.height - 12.0) +
         "\" text-anchor=\"middle\">iteration</text>\n";
  svg += "</g>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    std::string points;
    for (const auto& r : series[i].trace) {
      if (!std::isfinite(r.f_gap)) continue;
      const double y = std::log10(std::max(r.f_gap, opt.min_gap));
      points += detail::fmt(px(static_cast<double>(r.iter))) + "," + detail::fmt(py(y)) + " ";
    }
    svg += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" +
           std::string(detail::palette(i)) + "\" points=\"" + points + "\"/>\n";
    const double ly = top + 16.0 + 18.0 * static_cast<double>(i);
    svg += "<line x1=\"" + detail::fmt(left + pw + 12) + "\" x2=\"" + detail::fmt(left + pw + 36) +
           "\" y1=\"" + detail::fmt(ly) + "\" y2=\"" + detail::fmt(ly) + "\" stroke=\"" +
           detail::palette(i) + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + detail::fmt(left + pw + 42) + "\" y=\"" + detail::fmt(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + detail::svg_escape(series[i].label) +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace osgm
