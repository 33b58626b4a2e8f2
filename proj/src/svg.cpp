#include "routediff/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace routediff {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

void pad_range(double& lo, double& hi) {
  double span = hi - lo;
  if (span <= 0.0) span = 1.0;
  lo -= 0.05 * span;
  hi += 0.05 * span;
}

}  // namespace

ChartLayout compute_chart_layout(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.empty() || xs.size() != ys.size()) {
    throw std::invalid_argument("compute_chart_layout: need matching non-empty series");
  }
  ChartLayout layout;
  layout.x_min = *std::min_element(xs.begin(), xs.end());
  layout.x_max = *std::max_element(xs.begin(), xs.end());
  layout.y_min = *std::min_element(ys.begin(), ys.end());
  layout.y_max = *std::max_element(ys.begin(), ys.end());
  pad_range(layout.x_min, layout.x_max);
  pad_range(layout.y_min, layout.y_max);
  return layout;
}

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<double>& xs, const std::vector<double>& ys,
                      const std::vector<std::string>& x_tick_labels) {
  const ChartLayout layout = compute_chart_layout(xs, ys);
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const auto px = [&](double x) {
    return kMarginLeft + (x - layout.x_min) / (layout.x_max - layout.x_min) * plot_w;
  };
  const auto py = [&](double y) {
    return kMarginTop + plot_h - (y - layout.y_min) / (layout.y_max - layout.y_min) * plot_h;
  };

  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("write_line_chart: cannot open " + path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\">\n";
  os << "<!-- x_range " << layout.x_min << " " << layout.x_max << " y_range " << layout.y_min
     << " " << layout.y_max << " -->\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
     << title << "</text>\n";

  // axes
  os << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
     << "\" y2=\"" << kMarginTop + plot_h << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + plot_h << "\" x2=\""
     << kMarginLeft + plot_w << "\" y2=\"" << kMarginTop + plot_h << "\" stroke=\"black\"/>\n";

  // y ticks
  for (int i = 0; i <= 4; ++i) {
    const double y = layout.y_min + (layout.y_max - layout.y_min) * i / 4.0;
    os << "<line x1=\"" << kMarginLeft - 4 << "\" y1=\"" << py(y) << "\" x2=\"" << kMarginLeft
       << "\" y2=\"" << py(y) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << py(y) + 4
       << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(y) << "</text>\n";
  }
  // x ticks: one per data point when labels are given, else 5 uniform ticks
  if (!x_tick_labels.empty()) {
    for (std::size_t i = 0; i < xs.size() && i < x_tick_labels.size(); ++i) {
      os << "<text x=\"" << px(xs[i]) << "\" y=\"" << kMarginTop + plot_h + 18
         << "\" text-anchor=\"middle\" font-size=\"11\">" << x_tick_labels[i] << "</text>\n";
    }
  } else {
    for (int i = 0; i <= 4; ++i) {
      const double x = layout.x_min + (layout.x_max - layout.x_min) * i / 4.0;
      os << "<line x1=\"" << px(x) << "\" y1=\"" << kMarginTop + plot_h << "\" x2=\"" << px(x)
         << "\" y2=\"" << kMarginTop + plot_h + 4 << "\" stroke=\"black\"/>\n";
      os << "<text x=\"" << px(x) << "\" y=\"" << kMarginTop + plot_h + 18
         << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(x) << "</text>\n";
    }
  }
  os << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
  os << "<text x=\"18\" y=\"" << kMarginTop + plot_h / 2
     << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
     << kMarginTop + plot_h / 2 << ")\">" << y_label << "</text>\n";

  os << "<polyline class=\"series\" fill=\"none\" stroke=\"#1f6fb4\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    os << px(xs[i]) << "," << py(ys[i]) << " ";
  }
  os << "\"/>\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    os << "<circle cx=\"" << px(xs[i]) << "\" cy=\"" << py(ys[i])
       << "\" r=\"3\" fill=\"#1f6fb4\"/>\n";
  }
  os << "</svg>\n";
  if (!os) throw std::runtime_error("write_line_chart: write failed for " + path);
}

void write_scene_svg(const std::string& path, const ScenePlot& scene) {
  validate_polyline(scene.route);
  validate_polyline(scene.ground_truth);
  // Bounds across everything drawn, padded, equal-aspect.
  double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
  bool first = true;
  const auto grow = [&](Vec2 p) {
    if (first) {
      x_lo = x_hi = p.x;
      y_lo = y_hi = p.y;
      first = false;
      return;
    }
    x_lo = std::min(x_lo, p.x);
    x_hi = std::max(x_hi, p.x);
    y_lo = std::min(y_lo, p.y);
    y_hi = std::max(y_hi, p.y);
  };
  for (Vec2 p : scene.route.points) grow(p);
  for (Vec2 p : scene.ground_truth.points) grow(p);
  for (Vec2 p : scene.history.points) grow(p);
  for (const auto& pred : scene.predictions) {
    for (Vec2 p : pred) grow(p);
  }
  const double pad = scene.corridor_halfwidth + 3.0;
  x_lo -= pad;
  x_hi += pad;
  y_lo -= pad;
  y_hi += pad;

  constexpr int kSize = 560;
  const double scale = kSize / std::max(x_hi - x_lo, y_hi - y_lo);
  // Ego frame: +x (forward) is up, +y (left) is to the left of the image.
  const auto px = [&](Vec2 p) { return (y_hi - p.y) * scale + 20.0; };
  const auto py = [&](Vec2 p) { return (x_hi - p.x) * scale + 20.0; };
  const int width = static_cast<int>((y_hi - y_lo) * scale) + 40;
  const int height = static_cast<int>((x_hi - x_lo) * scale) + 40;

  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("write_scene_svg: cannot open " + path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Corridor band: route offset by +/- halfwidth along averaged segment normals.
  const auto& rp = scene.route.points;
  std::vector<Vec2> left(rp.size()), right(rp.size());
  for (std::size_t i = 0; i < rp.size(); ++i) {
    const Vec2 a = rp[i == 0 ? 0 : i - 1];
    const Vec2 b = rp[i + 1 < rp.size() ? i + 1 : rp.size() - 1];
    const Vec2 t = b - a;
    const double n = norm(t);
    const Vec2 nh = {-t.y / n, t.x / n};
    left[i] = rp[i] + nh * scene.corridor_halfwidth;
    right[i] = rp[i] - nh * scene.corridor_halfwidth;
  }
  os << "<polygon class=\"corridor\" fill=\"#cfe3f7\" stroke=\"none\" points=\"";
  for (Vec2 p : left) os << px(p) << "," << py(p) << " ";
  for (auto it = right.rbegin(); it != right.rend(); ++it) os << px(*it) << "," << py(*it) << " ";
  os << "\"/>\n";

  const auto polyline = [&](const std::vector<Vec2>& pts, const char* cls, const char* color,
                            double width_px) {
    os << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"" << width_px << "\" points=\"";
    for (Vec2 p : pts) os << px(p) << "," << py(p) << " ";
    os << "\"/>\n";
  };
  polyline(scene.route.points, "route", "#1f6fb4", 2.0);
  if (scene.history.points.size() >= 2) {
    polyline(scene.history.points, "history", "#e8a13c", 2.5);
  }
  polyline(scene.ground_truth.points, "ground-truth", "#d33131", 2.5);
  for (const auto& pred : scene.predictions) {
    polyline(pred, "prediction", "#2c9e4b", 1.8);
  }
  // ego marker at the origin
  os << "<circle cx=\"" << px({0, 0}) << "\" cy=\"" << py({0, 0})
     << "\" r=\"5\" fill=\"black\"/>\n";
  os << "</svg>\n";
  if (!os) throw std::runtime_error("write_scene_svg: write failed for " + path);
}

}  // namespace routediff
