#pragma once

#include <cstddef>
#include <vector>

namespace routediff {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
};

double dot(Vec2 a, Vec2 b);
double norm(Vec2 a);
double distance(Vec2 a, Vec2 b);

// Ordered 2-D waypoint sequence in the ego frame. Consecutive points must be
// distinct (> 1e-9 apart) and the polyline needs at least two of them.
struct Polyline {
  std::vector<Vec2> points;

  std::size_t size() const { return points.size(); }
};

// Throws std::invalid_argument describing the violation.
void validate_polyline(const Polyline& line);

// Distance from p to the closed segment [a, b].
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

// Minimum distance from p to any segment of the polyline.
double point_polyline_distance(Vec2 p, const Polyline& line);

// Walks the dense curve starting at `start_index` (interpolation parameter 0)
// placing `count` points each exactly `step` meters (chord length) from the
// previous one. `forward` selects walk direction along the point order.
// The first placed point is `count >= 1` steps away from the anchor: the
// anchor itself is not included.
std::vector<Vec2> chord_resample(const std::vector<Vec2>& dense, std::size_t anchor,
                                 double step, std::size_t count, bool forward);

}  // namespace routediff
