#pragma once

// SVG spectrogram plot: one polyline per spectral function, coloured by
// cluster id, over the box [0,1] x [0, max value].

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "eisc/spectra.hpp"

namespace eisc {

struct PlotSeries {
  std::size_t cluster_id = 0;
  std::string name;
  SpectralFunction function;
};

inline const char* series_color(std::size_t id) {
  static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                            "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                            "#bcbd22", "#17becf"};
  return palette[id % std::size(palette)];
}

inline std::string render_spectrogram_svg(std::span<const PlotSeries> series,
                                          const std::string& title) {
  constexpr double width = 640, height = 420;
  constexpr double left = 60, right = 150, top = 40, bottom = 50;
  constexpr double plot_w = width - left - right, plot_h = height - top - bottom;
  double y_max = 0.0;
  for (const auto& s : series) {
    for (double v : s.function.values()) y_max = std::max(y_max, v);
  }
  if (y_max <= 0.0) y_max = 1.0;

  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return std::string(buf);
  };
  auto px = [&](double x) { return left + x * plot_w; };
  auto py = [&](double y) { return top + plot_h - (y / y_max) * plot_h; };
  auto escape = [](const std::string& text) {
    std::string out;
    for (char c : text) {
      switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
      }
    }
    return out;
  };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
         num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) +
         "\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(left) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" +
         escape(title) + "</text>\n";
  // axes
  svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + num(px(0)) + "\" y1=\"" + num(py(0)) + "\" x2=\"" + num(px(1)) +
         "\" y2=\"" + num(py(0)) + "\"/>\n";
  svg += "<line x1=\"" + num(px(0)) + "\" y1=\"" + num(py(0)) + "\" x2=\"" + num(px(0)) +
         "\" y2=\"" + num(py(y_max)) + "\"/>\n";
  svg += "</g>\n";
  svg += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int t = 0; t <= 4; ++t) {
    const double x = t / 4.0;
    const double y = y_max * t / 4.0;
    svg += "<text x=\"" + num(px(x)) + "\" y=\"" + num(py(0) + 16) +
           "\" text-anchor=\"middle\">" + num(x) + "</text>\n";
    svg += "<text x=\"" + num(px(0) - 6) + "\" y=\"" + num(py(y) + 4) +
           "\" text-anchor=\"end\">" + num(y) + "</text>\n";
  }
  svg += "</g>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const auto& k = s.function.knots();
    const auto& v = s.function.values();
    svg += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" +
           std::string(series_color(s.cluster_id)) + "\" data-cluster=\"" +
           std::to_string(s.cluster_id) + "\" points=\"";
    for (std::size_t p = 0; p < k.size(); ++p) {
      if (p) svg += ' ';
      svg += num(px(k[p])) + "," + num(py(v[p]));
    }
    svg += "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(i);
    svg += "<line x1=\"" + num(width - right + 10) + "\" y1=\"" + num(ly) + "\" x2=\"" +
           num(width - right + 30) + "\" y2=\"" + num(ly) + "\" stroke=\"" +
           std::string(series_color(s.cluster_id)) + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(width - right + 36) + "\" y=\"" + num(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(s.name) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace eisc
