#pragma once

// Minimal SVG line plots. Layout depends only on the data, so the same
// series always produce the same bytes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

namespace nilnet {

struct Series {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  int width = 640;
  int height = 400;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                           "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace detail

inline std::string render_svg(const LinePlot& plot) {
  using detail::fmt;
  const double left = 70, right = 150, top = 40, bottom = 50;
  const double pw = plot.width - left - right;
  const double ph = plot.height - top - bottom;

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < std::min(s.xs.size(), s.ys.size()); ++i) {
      if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
      x0 = std::min(x0, s.xs[i]);
      x1 = std::max(x1, s.xs[i]);
      y0 = std::min(y0, s.ys[i]);
      y1 = std::max(y1, s.ys[i]);
    }
  }
  if (!std::isfinite(x0)) {
    x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(plot.width) + "\" height=\"" +
       std::to_string(plot.height) + "\" viewBox=\"0 0 " + std::to_string(plot.width) + " " +
       std::to_string(plot.height) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(plot.width) + "\" height=\"" +
       std::to_string(plot.height) + "\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt("%.1f", left + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
       detail::xml_escape(plot.title) + "</text>\n";

  // axes and ticks
  s += "<g stroke=\"#444\" stroke-width=\"1\" fill=\"none\">\n";
  s += "<rect x=\"" + fmt("%.1f", left) + "\" y=\"" + fmt("%.1f", top) + "\" width=\"" + fmt("%.1f", pw) +
       "\" height=\"" + fmt("%.1f", ph) + "\"/>\n";
  s += "</g>\n<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">\n";
  const int ticks = 5;
  for (int t = 0; t <= ticks; ++t) {
    const double xv = x0 + (x1 - x0) * t / ticks;
    const double yv = y0 + (y1 - y0) * t / ticks;
    s += "<line x1=\"" + fmt("%.1f", px(xv)) + "\" y1=\"" + fmt("%.1f", top + ph) + "\" x2=\"" +
         fmt("%.1f", px(xv)) + "\" y2=\"" + fmt("%.1f", top + ph + 4) + "\" stroke=\"#444\"/>\n";
    s += "<text x=\"" + fmt("%.1f", px(xv)) + "\" y=\"" + fmt("%.1f", top + ph + 17) +
         "\" text-anchor=\"middle\">" + fmt("%.4g", xv) + "</text>\n";
    s += "<line x1=\"" + fmt("%.1f", left - 4) + "\" y1=\"" + fmt("%.1f", py(yv)) + "\" x2=\"" +
         fmt("%.1f", left) + "\" y2=\"" + fmt("%.1f", py(yv)) + "\" stroke=\"#444\"/>\n";
    s += "<text x=\"" + fmt("%.1f", left - 7) + "\" y=\"" + fmt("%.1f", py(yv) + 4) +
         "\" text-anchor=\"end\">" + fmt("%.4g", yv) + "</text>\n";
  }
  s += "<text x=\"" + fmt("%.1f", left + pw / 2) + "\" y=\"" + fmt("%.1f", plot.height - 10.0) +
       "\" text-anchor=\"middle\">" + detail::xml_escape(plot.x_label) + "</text>\n";
  s += "<text x=\"16\" y=\"" + fmt("%.1f", top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       fmt("%.1f", top + ph / 2) + ")\">" + detail::xml_escape(plot.y_label) + "</text>\n";
  s += "</g>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& ser = plot.series[k];
    const char* color = detail::kPalette[k % std::size(detail::kPalette)];
    std::string pts;
    for (std::size_t i = 0; i < std::min(ser.xs.size(), ser.ys.size()); ++i) {
      if (!std::isfinite(ser.xs[i]) || !std::isfinite(ser.ys[i])) continue;
      if (!pts.empty()) pts += ' ';
      pts += fmt("%.2f", px(ser.xs[i])) + "," + fmt("%.2f", py(ser.ys[i]));
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts +
         "\"/>\n";
    const double ly = top + 14.0 + 18.0 * static_cast<double>(k);
    s += "<line x1=\"" + fmt("%.1f", left + pw + 12) + "\" y1=\"" + fmt("%.1f", ly - 4) + "\" x2=\"" +
         fmt("%.1f", left + pw + 32) + "\" y2=\"" + fmt("%.1f", ly - 4) + "\" stroke=\"" + color +
         "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fmt("%.1f", left + pw + 37) + "\" y=\"" + fmt("%.1f", ly) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + detail::xml_escape(ser.name) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace nilnet
