#include "routediff/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace routediff {

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

double distance(Vec2 a, Vec2 b) { return norm(a - b); }

void validate_polyline(const Polyline& line) {
  if (line.points.size() < 2) {
    throw std::invalid_argument("polyline needs at least 2 waypoints, got " +
                                std::to_string(line.points.size()));
  }
  for (std::size_t i = 1; i < line.points.size(); ++i) {
    if (distance(line.points[i - 1], line.points[i]) <= 1e-9) {
      throw std::invalid_argument("polyline has coincident consecutive waypoints at index " +
                                  std::to_string(i));
    }
  }
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return distance(p, a);
  double t = dot(p - a, d) / len2;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return distance(p, a + d * t);
}

double point_polyline_distance(Vec2 p, const Polyline& line) {
  validate_polyline(line);
  double best = point_segment_distance(p, line.points[0], line.points[1]);
  for (std::size_t i = 2; i < line.points.size(); ++i) {
    const double d = point_segment_distance(p, line.points[i - 1], line.points[i]);
    if (d < best) best = d;
  }
  return best;
}

std::vector<Vec2> chord_resample(const std::vector<Vec2>& dense, std::size_t anchor,
                                 double step, std::size_t count, bool forward) {
  if (anchor >= dense.size()) throw std::invalid_argument("chord_resample: anchor out of range");
  if (step <= 0.0) throw std::invalid_argument("chord_resample: step must be positive");

  std::vector<Vec2> out;
  out.reserve(count);
  Vec2 prev = dense[anchor];
  const std::ptrdiff_t dir = forward ? 1 : -1;
  std::ptrdiff_t i = static_cast<std::ptrdiff_t>(anchor);
  double u = 0.0;  // parameter along the oriented segment [i, i+dir]

  while (out.size() < count) {
    const std::ptrdiff_t j = i + dir;
    if (j < 0 || j >= static_cast<std::ptrdiff_t>(dense.size())) {
      throw std::invalid_argument("chord_resample: curve too short for requested points");
    }
    const Vec2 a = dense[static_cast<std::size_t>(i)];
    const Vec2 b = dense[static_cast<std::size_t>(j)];
    const Vec2 d = b - a;
    const Vec2 f = a - prev;
    // |a + t d - prev| = step, outward crossing = larger root.
    const double qa = dot(d, d);
    const double qb = 2.0 * dot(f, d);
    const double qc = dot(f, f) - step * step;
    const double disc = qb * qb - 4.0 * qa * qc;
    bool placed = false;
    if (disc >= 0.0 && qa > 0.0) {
      const double t = (-qb + std::sqrt(disc)) / (2.0 * qa);
      if (t >= u - 1e-15 && t <= 1.0) {
        prev = a + d * t;
        out.push_back(prev);
        u = t;
        placed = true;
      }
    }
    if (!placed) {
      i = j;
      u = 0.0;
    }
  }
  return out;
}

}  // namespace routediff
