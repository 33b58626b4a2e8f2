#pragma once

#include <string>
#include <vector>

#include "routediff/geometry.hpp"

namespace routediff {

// Data ranges padded by 5% of the span on each side (1.0 fallback span for
// constant data).
struct ChartLayout {
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
};

ChartLayout compute_chart_layout(const std::vector<double>& xs, const std::vector<double>& ys);

// Single-series line chart with axes and tick labels. Optional per-point
// x tick labels replace numeric ticks (used for categorical sweeps).
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<double>& xs, const std::vector<double>& ys,
                      const std::vector<std::string>& x_tick_labels = {});

// BEV scene snapshot: route corridor band, history, ground truth, and one
// polyline per predicted trajectory (class="prediction" each).
struct ScenePlot {
  Polyline route;
  double corridor_halfwidth = 3.0;
  Polyline history;
  Polyline ground_truth;
  std::vector<std::vector<Vec2>> predictions;
};

void write_scene_svg(const std::string& path, const ScenePlot& scene);

}  // namespace routediff
