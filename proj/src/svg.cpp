#include "rome/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace rome {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 160, kTop = 40, kBottom = 55;

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;

  double map(double v) const {
    const double t = log ? std::log10(v) : v;
    return (t - lo) / (hi - lo);
  }
};

Axis fit_axis(const std::vector<double>& values, bool log) {
  Axis a;
  a.log = log;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) {
    if (!std::isfinite(v) || (log && v <= 0)) continue;
    const double t = log ? std::log10(v) : v;
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  const double pad = log ? 0.0 : 0.05 * (hi - lo);
  a.lo = lo - pad;
  a.hi = hi + pad;
  return a;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const Plot& plot) {
  std::vector<double> xs, ys;
  for (const auto& s : plot.series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  for (const auto& b : plot.bands) {
    xs.insert(xs.end(), b.x.begin(), b.x.end());
    ys.insert(ys.end(), b.lower.begin(), b.lower.end());
    ys.insert(ys.end(), b.upper.begin(), b.upper.end());
  }
  const Axis ax = fit_axis(xs, plot.log_x);
  const Axis ay = fit_axis(ys, false);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + ax.map(v) * pw; };
  auto py = [&](double v) { return kTop + (1.0 - ay.map(v)) * ph; };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
      "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kWidth, kHeight);
  out += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", kLeft + pw / 2,
                     escape(plot.title));

  for (const auto& b : plot.bands) {
    std::string pts;
    for (std::size_t i = 0; i < b.x.size(); ++i) pts += fmt::format("{:.2f},{:.2f} ", px(b.x[i]), py(b.upper[i]));
    for (std::size_t i = b.x.size(); i-- > 0;) pts += fmt::format("{:.2f},{:.2f} ", px(b.x[i]), py(b.lower[i]));
    out += fmt::format("<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.2\" stroke=\"none\"/>\n", pts, b.color);
  }

  // Axes and ticks
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
                     kTop, pw, ph);
  for (int i = 0; i <= 5; ++i) {
    const double f = i / 5.0;
    const double xv = ax.lo + f * (ax.hi - ax.lo);
    const double yv = ay.lo + f * (ay.hi - ay.lo);
    const double x = kLeft + f * pw, y = kTop + (1 - f) * ph;
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"black\"/>\n", x,
                       kTop + ph, kTop + ph + 5);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:.3g}</text>\n", x, kTop + ph + 18,
                       ax.log ? std::pow(10.0, xv) : xv);
    out += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"black\"/>\n", kLeft - 5, y,
                       kLeft, y);
    out += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3g}</text>\n", kLeft - 8, y + 4, yv);
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2, kHeight - 12,
                     escape(plot.x_label));
  out += fmt::format(
      "<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
      kTop + ph / 2, escape(plot.y_label));

  double legend_y = kTop + 10;
  for (const auto& s : plot.series) {
    std::string pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      pts += fmt::format("{:.2f},{:.2f} ", px(s.x[i]), py(s.y[i]));
    }
    const char* dash = s.dashed ? " stroke-dasharray=\"6 4\"" : "";
    out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{}/>\n", pts, s.color,
                       dash);
    const double lx = kLeft + pw + 12;
    out += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"{}\" stroke-width=\"2\"{}/>\n", lx,
                       legend_y, lx + 24, legend_y, s.color, dash);
    out += fmt::format("<text x=\"{}\" y=\"{:.2f}\">{}</text>\n", lx + 30, legend_y + 4, escape(s.label));
    legend_y += 18;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace rome
