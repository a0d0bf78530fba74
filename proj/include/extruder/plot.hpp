#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace extruder {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct PlotPanel {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<PlotSeries> series;
  // Horizontal reference line (e.g. T_m), drawn when finite.
  double hline = std::numeric_limits<double>::quiet_NaN();
  std::string hline_label;

  PlotPanel() = default;
  PlotPanel(std::string t, std::string xl, std::string yl, std::vector<PlotSeries> s = {})
      : title(std::move(t)), xlabel(std::move(xl)), ylabel(std::move(yl)), series(std::move(s)) {}
};

/// Self-contained SVG with the panels stacked vertically.
std::string render_svg(const std::vector<PlotPanel>& panels, int width = 720,
                       int panel_height = 300);

/// Color cycle for overlays.
const char* plot_color(std::size_t i);

}  // namespace extruder
