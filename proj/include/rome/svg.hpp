#pragma once

#include <string>
#include <vector>

namespace rome {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

/// Shaded region between two curves sharing x.
struct PlotBand {
  std::vector<double> x;
  std::vector<double> lower;
  std::vector<double> upper;
  std::string color = "#1f77b4";
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  std::vector<PlotBand> bands;
  std::vector<PlotSeries> series;
};

/// Standalone SVG document with axes, ticks and a legend.
std::string render_svg(const Plot& plot);

}  // namespace rome
