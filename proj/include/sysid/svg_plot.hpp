#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "sysid/errors.hpp"

namespace sysid {

// One curve of a log-log median plot with interquartile whiskers.
struct PlotSeries {
  std::string label;
  std::vector<double> x;       // e.g. trajectory lengths
  std::vector<double> median;
  std::vector<double> q25;
  std::vector<double> q75;
};

namespace svg_detail {

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

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline const char* series_color(std::size_t i) {
  static const char* kPalette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b"};
  return kPalette[i % 6];
}

}  // namespace svg_detail

// Self-contained log-log SVG line chart: one polyline per series through the
// medians, a vertical whisker from q25 to q75 at each point, decade tick
// labels, a legend and a title. No external assets.
inline void write_svg_plot(const std::vector<PlotSeries>& series, const std::string& title,
                           const std::string& path) {
  std::size_t total_points = 0;
  for (const PlotSeries& s : series) {
    total_points += s.x.size();
  }
  if (series.empty() || total_points == 0) {
    throw EmptyPlotError("write_svg_plot: nothing to plot");
  }

  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool first = true;
  for (const PlotSeries& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0.0)) {
        throw InvalidInputError("write_svg_plot: x values must be positive on a log scale");
      }
      const double lo = std::max(s.q25[i], 1e-300);
      const double hi = std::max(s.q75[i], 1e-300);
      const double mid = std::max(s.median[i], 1e-300);
      if (first) {
        xmin = xmax = s.x[i];
        ymin = std::min(lo, mid);
        ymax = std::max(hi, mid);
        first = false;
      } else {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, std::min(lo, mid));
        ymax = std::max(ymax, std::max(hi, mid));
      }
    }
  }
  double lx0 = std::log10(xmin), lx1 = std::log10(xmax);
  double ly0 = std::log10(ymin), ly1 = std::log10(ymax);
  if (lx1 - lx0 < 0.5) { lx0 -= 0.25; lx1 += 0.25; }
  if (ly1 - ly0 < 0.5) { ly0 -= 0.25; ly1 += 0.25; }
  lx0 -= 0.05 * (lx1 - lx0); lx1 += 0.05 * (lx1 - lx0);
  ly0 -= 0.06 * (ly1 - ly0); ly1 += 0.06 * (ly1 - ly0);

  const double left = 70, right = 160, top = 44, bottom = 52;
  const double plot_w = 520, plot_h = 360;
  const double width = left + plot_w + right, height = top + plot_h + bottom;
  const auto X = [&](double v) { return left + (std::log10(v) - lx0) / (lx1 - lx0) * plot_w; };
  const auto Y = [&](double v) {
    const double lv = std::log10(std::max(v, 1e-300));
    return top + plot_h - (lv - ly0) / (ly1 - ly0) * plot_h;
  };

  using svg_detail::num;
  using svg_detail::xml_escape;
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open " + path + " for writing");
  }
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">"
      << xml_escape(title) << "</text>\n";

  // frame
  out << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(plot_w)
      << "\" height=\"" << num(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";

  // decade ticks
  for (int e = static_cast<int>(std::ceil(lx0)); e <= static_cast<int>(std::floor(lx1)); ++e) {
    const double xv = std::pow(10.0, e);
    out << "<line x1=\"" << num(X(xv)) << "\" y1=\"" << num(top + plot_h) << "\" x2=\""
        << num(X(xv)) << "\" y2=\"" << num(top + plot_h + 6) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(X(xv)) << "\" y=\"" << num(top + plot_h + 22)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">1e" << e
        << "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(ly0)); e <= static_cast<int>(std::floor(ly1)); ++e) {
    const double yv = std::pow(10.0, e);
    out << "<line x1=\"" << num(left - 6) << "\" y1=\"" << num(Y(yv)) << "\" x2=\"" << num(left)
        << "\" y2=\"" << num(Y(yv)) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(left - 10) << "\" y=\"" << num(Y(yv) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1e" << e
        << "</text>\n";
  }
  out << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(height - 12)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">T</text>\n";
  out << "<text x=\"18\" y=\"" << num(top + plot_h / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 18 "
      << num(top + plot_h / 2) << ")\">median error</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    const char* color = svg_detail::series_color(si);
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << "<line x1=\"" << num(X(s.x[i])) << "\" y1=\"" << num(Y(s.q25[i])) << "\" x2=\""
          << num(X(s.x[i])) << "\" y2=\"" << num(Y(s.q75[i])) << "\" stroke=\"" << color
          << "\" stroke-width=\"1\"/>\n";
      for (double q : {s.q25[i], s.q75[i]}) {
        out << "<line x1=\"" << num(X(s.x[i]) - 4) << "\" y1=\"" << num(Y(q)) << "\" x2=\""
            << num(X(s.x[i]) + 4) << "\" y2=\"" << num(Y(q)) << "\" stroke=\"" << color
            << "\" stroke-width=\"1\"/>\n";
      }
    }
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i > 0) out << " ";
      out << num(X(s.x[i])) << "," << num(Y(s.median[i]));
    }
    out << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << "<circle cx=\"" << num(X(s.x[i])) << "\" cy=\"" << num(Y(s.median[i]))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = top + 16 + 20 * static_cast<double>(si);
    out << "<line x1=\"" << num(left + plot_w + 14) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(left + plot_w + 40) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(left + plot_w + 46) << "\" y=\"" << num(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(s.label)
        << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) {
    throw IoError("write failure on " + path);
  }
}

}  // namespace sysid
