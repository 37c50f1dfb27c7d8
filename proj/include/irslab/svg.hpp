#pragma once

#include <string>
#include <utility>
#include <vector>

#include "irslab/cone.hpp"

namespace irslab {

struct PlotSeries {
  std::string label;
  std::string color;  // SVG color name or #rrggbb
  std::vector<std::pair<double, double>> points;
};

// Horizontal band [lo, hi] across the full x range (e.g. a spectral interval).
struct PlotBand {
  std::string label;
  std::string color;
  double lo = 0;
  double hi = 0;
};

// Static line plot, one polyline per series with point markers, min/max axis
// labels, deterministic text output.
std::string svg_line_plot(const std::string& title, const std::string& xlabel,
                          const std::string& ylabel, const std::vector<PlotSeries>& series,
                          const std::vector<PlotBand>& bands = {});

// Two-dimensional bodies drawn into the unit square viewport. Singletons
// render as dots, segments as lines, polygons as closed outlines.
std::string svg_bodies(const std::string& title,
                       const std::vector<std::pair<ConvexBody, std::string>>& bodies);

}  // namespace irslab
