#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "attnkit/bench.hpp"

namespace attnkit {

// Minimal static SVG line chart on log-log axes, one series per mechanism.
// Charts are a presentation layer only; the CSV stays the source of truth.
namespace svg_detail {

inline const char* series_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                  "#bcbd22", "#17becf"};
  return palette[i % 10];
}

}  // namespace svg_detail

inline std::string bench_chart_svg(const std::vector<BenchRecord>& records,
                                   bool memory, const std::string& title) {
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  double xmin = 1e300, xmax = 0.0, ymin = 1e300, ymax = 0.0;
  for (const BenchRecord& r : records) {
    const double x = static_cast<double>(r.length);
    const double y = memory ? static_cast<double>(r.peak_bytes) : r.median_time_s;
    if (y <= 0.0 || x <= 0.0) continue;
    series[mechanism_name(r.mechanism)].push_back({x, y});
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }

  const double width = 720, height = 480;
  const double left = 70, right = 150, top = 40, bottom = 50;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  if (series.empty() || xmin >= xmax) {
    return "<svg xmlns='http://www.w3.org/2000/svg' width='720' height='480'/>";
  }
  if (ymin >= ymax) ymax = ymin * 10.0;

  const double lx0 = std::log10(xmin), lx1 = std::log10(xmax);
  const double ly0 = std::log10(ymin), ly1 = std::log10(ymax);
  auto px = [&](double x) { return left + (std::log10(x) - lx0) / (lx1 - lx0) * plot_w; };
  auto py = [&](double y) { return top + plot_h - (std::log10(y) - ly0) / (ly1 - ly0) * plot_h; };

  std::ostringstream out;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
      << height << "' font-family='sans-serif' font-size='12'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << left << "' y='20' font-size='15'>" << title << "</text>\n";
  out << "<rect x='" << left << "' y='" << top << "' width='" << plot_w << "' height='"
      << plot_h << "' fill='none' stroke='#333'/>\n";

  for (int e = static_cast<int>(std::floor(lx0)); e <= static_cast<int>(std::ceil(lx1)); ++e) {
    const double x = std::pow(10.0, e);
    if (x < xmin || x > xmax) continue;
    out << "<line x1='" << px(x) << "' y1='" << top << "' x2='" << px(x) << "' y2='"
        << top + plot_h << "' stroke='#ddd'/>\n";
    out << "<text x='" << px(x) - 10 << "' y='" << top + plot_h + 18 << "'>1e" << e
        << "</text>\n";
  }
  for (int e = static_cast<int>(std::floor(ly0)); e <= static_cast<int>(std::ceil(ly1)); ++e) {
    const double y = std::pow(10.0, e);
    if (y < ymin || y > ymax) continue;
    out << "<line x1='" << left << "' y1='" << py(y) << "' x2='" << left + plot_w
        << "' y2='" << py(y) << "' stroke='#ddd'/>\n";
    out << "<text x='" << left - 45 << "' y='" << py(y) + 4 << "'>1e" << e << "</text>\n";
  }
  out << "<text x='" << left + plot_w / 2 - 50 << "' y='" << height - 10
      << "'>sequence length (tokens)</text>\n";

  std::size_t idx = 0;
  for (const auto& [name, points] : series) {
    auto sorted = points;
    std::sort(sorted.begin(), sorted.end());
    out << "<polyline fill='none' stroke='" << svg_detail::series_color(idx)
        << "' stroke-width='1.8' points='";
    for (const auto& [x, y] : sorted) out << px(x) << ',' << py(y) << ' ';
    out << "'/>\n";
    for (const auto& [x, y] : sorted) {
      out << "<circle cx='" << px(x) << "' cy='" << py(y) << "' r='2.6' fill='"
          << svg_detail::series_color(idx) << "'/>\n";
    }
    const double ly = top + 16.0 * static_cast<double>(idx);
    out << "<line x1='" << left + plot_w + 10 << "' y1='" << ly << "' x2='"
        << left + plot_w + 34 << "' y2='" << ly << "' stroke='"
        << svg_detail::series_color(idx) << "' stroke-width='2'/>\n";
    out << "<text x='" << left + plot_w + 40 << "' y='" << ly + 4 << "'>" << name
        << "</text>\n";
    ++idx;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace attnkit
