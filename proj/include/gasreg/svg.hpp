#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "gasreg/errors.hpp"

namespace gasreg {

// Minimal deterministic line charts. Everything is emitted with fixed
// formatting so identical data produces identical bytes.

struct Series {
  std::string label;
  const std::vector<double>* y = nullptr;
};

struct ChartSpec {
  std::string title, x_label, y_label;
  const std::vector<double>* x = nullptr;
  std::vector<Series> series;
};

namespace detail {

constexpr int kChartW = 960, kChartH = 540;
constexpr int kMarginL = 76, kMarginR = 28, kMarginT = 48, kMarginB = 64;
constexpr std::size_t kMaxPoints = 1500;

inline const char* series_color(std::size_t k) {
  static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                            "#9467bd", "#ff7f0e", "#8c564b"};
  return palette[k % (sizeof(palette) / sizeof(palette[0]))];
}

inline std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline std::string fmt_pos(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Tick step of the form {1, 2, 5} * 10^k giving roughly `target` ticks.
inline double nice_step(double range, int target) {
  const double raw = range / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double frac = raw / mag;
  if (frac <= 1.0) return mag;
  if (frac <= 2.0) return 2.0 * mag;
  if (frac <= 5.0) return 5.0 * mag;
  return 10.0 * mag;
}

struct AxisRange {
  double lo = 0.0, hi = 1.0, step = 0.2;
};

inline AxisRange axis_range(double lo, double hi, int target) {
  if (!(lo <= hi)) std::swap(lo, hi);
  if (hi - lo < 1e-300) {
    const double pad = std::max(1.0, std::abs(lo)) * 0.1;
    lo -= pad;
    hi += pad;
  }
  AxisRange r;
  r.step = nice_step(hi - lo, target);
  r.lo = std::floor(lo / r.step) * r.step;
  r.hi = std::ceil(hi / r.step) * r.step;
  return r;
}

inline std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace detail

inline void write_line_chart(std::ostream& os, const ChartSpec& spec) {
  using namespace detail;
  if (spec.x == nullptr || spec.series.empty())
    throw invalid_input("chart needs an x axis and at least one series");
  const std::vector<double>& xs = *spec.x;
  if (xs.size() < 2) throw invalid_input("chart needs at least two points");
  for (const auto& s : spec.series)
    if (s.y == nullptr || s.y->size() != xs.size())
      throw invalid_input("chart series length must match the x axis");

  double ylo = (*spec.series[0].y)[0], yhi = ylo;
  for (const auto& s : spec.series)
    for (double v : *s.y) {
      ylo = std::min(ylo, v);
      yhi = std::max(yhi, v);
    }
  const AxisRange ax = axis_range(xs.front(), xs.back(), 8);
  const AxisRange ay = axis_range(ylo, yhi, 6);

  const double pw = kChartW - kMarginL - kMarginR;
  const double ph = kChartH - kMarginT - kMarginB;
  const auto px = [&](double v) { return kMarginL + (v - ax.lo) / (ax.hi - ax.lo) * pw; };
  const auto py = [&](double v) { return kMarginT + (ay.hi - v) / (ay.hi - ay.lo) * ph; };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kChartW << "\" height=\""
     << kChartH << "\" viewBox=\"0 0 " << kChartW << ' ' << kChartH << "\">\n";
  os << "<rect width=\"" << kChartW << "\" height=\"" << kChartH << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << kChartW / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"16\">"
     << escape_xml(spec.title) << "</text>\n";

  // Grid and ticks. Half-step rounding keeps the loop counts exact.
  os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (double v = ax.lo; v <= ax.hi + 0.5 * ax.step; v += ax.step) {
    const double gx = px(v);
    os << "<line x1=\"" << fmt_pos(gx) << "\" y1=\"" << kMarginT << "\" x2=\"" << fmt_pos(gx)
       << "\" y2=\"" << kMarginT + ph << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << fmt_pos(gx) << "\" y=\"" << fmt_pos(kMarginT + ph + 16)
       << "\" text-anchor=\"middle\">" << fmt_g(v) << "</text>\n";
  }
  for (double v = ay.lo; v <= ay.hi + 0.5 * ay.step; v += ay.step) {
    const double gy = py(v);
    os << "<line x1=\"" << kMarginL << "\" y1=\"" << fmt_pos(gy) << "\" x2=\""
       << fmt_pos(kMarginL + pw) << "\" y2=\"" << fmt_pos(gy)
       << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << kMarginL - 6 << "\" y=\"" << fmt_pos(gy + 4)
       << "\" text-anchor=\"end\">" << fmt_g(v) << "</text>\n";
  }
  os << "</g>\n";

  os << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\"" << fmt_pos(pw)
     << "\" height=\"" << fmt_pos(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  os << "<text x=\"" << kMarginL + pw / 2 << "\" y=\"" << kChartH - 14
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
     << escape_xml(spec.x_label) << "</text>\n";
  os << "<text x=\"20\" y=\"" << kMarginT + ph / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        "transform=\"rotate(-90 20 "
     << kMarginT + ph / 2 << ")\">" << escape_xml(spec.y_label) << "</text>\n";

  const std::size_t stride = (xs.size() + kMaxPoints - 1) / kMaxPoints;
  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& ys = *spec.series[k].y;
    os << "<polyline fill=\"none\" stroke=\"" << series_color(k)
       << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size(); i += stride) {
      os << fmt_pos(px(xs[i])) << ',' << fmt_pos(py(ys[i])) << ' ';
    }
    if ((xs.size() - 1) % stride != 0)
      os << fmt_pos(px(xs.back())) << ',' << fmt_pos(py(ys.back())) << ' ';
    os << "\"/>\n";
  }

  // Legend, one row per series, top-right corner of the plot area.
  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const double ly = kMarginT + 14 + 16.0 * static_cast<double>(k);
    const double lx = kMarginL + pw - 150;
    os << "<line x1=\"" << fmt_pos(lx) << "\" y1=\"" << fmt_pos(ly - 4) << "\" x2=\""
       << fmt_pos(lx + 22) << "\" y2=\"" << fmt_pos(ly - 4) << "\" stroke=\"" << series_color(k)
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << fmt_pos(lx + 28) << "\" y=\"" << fmt_pos(ly)
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(spec.series[k].label)
       << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace gasreg
