#include "routediff/scenario.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "binio.hpp"

namespace routediff {

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kStraight: return "straight";
    case ScenarioKind::kCurveLeft: return "curve_left";
    case ScenarioKind::kCurveRight: return "curve_right";
    case ScenarioKind::kTJunctionLeft: return "t_junction_left";
    case ScenarioKind::kTJunctionRight: return "t_junction_right";
  }
  throw std::invalid_argument("unknown ScenarioKind");
}

ScenarioKind scenario_kind_from_string(const std::string& name) {
  for (ScenarioKind k : kAllScenarioKinds) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown scenario kind '" + name + "'");
}

namespace {

constexpr double kDenseStep = 0.1;  // meters between dense centerline samples
constexpr double kBackExtent = 14.0;
constexpr double kForwardExtent = 36.0;

// Ideal centerline position at arc length s for one scenario family.
struct CenterlineFn {
  ScenarioKind kind;
  double radius;         // curves and junction corner
  double corner_start;   // junction: approach length ahead of ego

  Vec2 at(double s) const {
    switch (kind) {
      case ScenarioKind::kStraight:
        return {s, 0.0};
      case ScenarioKind::kCurveLeft:
      case ScenarioKind::kCurveRight: {
        const double sign = kind == ScenarioKind::kCurveLeft ? 1.0 : -1.0;
        const double a = s / radius;
        return {radius * std::sin(a), sign * radius * (1.0 - std::cos(a))};
      }
      case ScenarioKind::kTJunctionLeft:
      case ScenarioKind::kTJunctionRight: {
        const double sign = kind == ScenarioKind::kTJunctionLeft ? 1.0 : -1.0;
        if (s <= corner_start) return {s, 0.0};
        const double arc_len = radius * std::numbers::pi / 2.0;
        if (s <= corner_start + arc_len) {
          const double a = (s - corner_start) / radius;
          return {corner_start + radius * std::sin(a), sign * radius * (1.0 - std::cos(a))};
        }
        const double tail = s - corner_start - arc_len;
        return {corner_start + radius, sign * (radius + tail)};
      }
    }
    return {0.0, 0.0};
  }
};

// Lateral displacement of a path relative to the ideal centerline: a rigid
// offset carrying just over half the variance plus low-amplitude long-wave
// waviness. Pointwise standard deviation is sigma; the split keeps jittered
// paths close to the re-anchored ideal geometry even on long horizons.
struct LateralField {
  double constant = 0.0;
  std::array<double, 3> amplitude{};
  std::array<double, 3> phase{};
  static constexpr std::array<double, 3> kWavelength = {47.0, 29.0, 19.0};

  static LateralField draw(Rng& rng, double sigma) {
    LateralField f;
    f.constant = sigma * std::sqrt(0.56) * rng.normal();
    const double comp_sigma = sigma * std::sqrt(0.44 * 2.0 / 3.0);
    for (std::size_t i = 0; i < f.amplitude.size(); ++i) {
      f.amplitude[i] = comp_sigma * rng.normal();
      f.phase[i] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    return f;
  }

  double at(double s) const {
    double v = constant;
    for (std::size_t i = 0; i < amplitude.size(); ++i) {
      v += amplitude[i] * std::sin(2.0 * std::numbers::pi * s / kWavelength[i] + phase[i]);
    }
    return v;
  }
};

struct DenseCurve {
  std::vector<Vec2> points;
  std::size_t anchor = 0;  // index of station s = 0
};

Vec2 unit_normal(Vec2 tangent) {
  const double n = norm(tangent);
  return {-tangent.y / n, tangent.x / n};
}

DenseCurve dense_offset_curve(const CenterlineFn& center, const LateralField& field,
                              double field_scale) {
  DenseCurve curve;
  const int n_back = static_cast<int>(std::round(kBackExtent / kDenseStep));
  const int n_fwd = static_cast<int>(std::round(kForwardExtent / kDenseStep));
  const int n = n_back + n_fwd + 1;
  std::vector<Vec2> centers(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    centers[static_cast<std::size_t>(i)] = center.at((i - n_back) * kDenseStep);
  }
  curve.points.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Vec2 a = centers[static_cast<std::size_t>(std::max(0, i - 1))];
    const Vec2 b = centers[static_cast<std::size_t>(std::min(n - 1, i + 1))];
    const double s = (i - n_back) * kDenseStep;
    curve.points[static_cast<std::size_t>(i)] =
        centers[static_cast<std::size_t>(i)] + unit_normal(b - a) * (field_scale * field.at(s));
  }
  curve.anchor = static_cast<std::size_t>(n_back);
  return curve;
}

void translate_points(std::vector<Vec2>& pts, Vec2 shift) {
  for (Vec2& p : pts) p = p - shift;
}

}  // namespace

ScenarioSample generate_scenario(ScenarioKind kind, std::uint64_t seed, const GenParams& params) {
  Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(kind));

  CenterlineFn center{kind, 0.0, 0.0};
  switch (kind) {
    case ScenarioKind::kStraight:
      break;
    case ScenarioKind::kCurveLeft:
    case ScenarioKind::kCurveRight:
      center.radius = rng.uniform(params.curve_radius_min, params.curve_radius_max);
      break;
    case ScenarioKind::kTJunctionLeft:
    case ScenarioKind::kTJunctionRight:
      center.radius = params.junction_radius;
      center.corner_start = rng.uniform(8.0, 16.0);
      break;
  }

  const LateralField driven_field = LateralField::draw(rng, params.jitter_sigma);
  const LateralField route_field = LateralField::draw(rng, params.jitter_sigma);
  const double scale = params.jitter_sigma > 0.0 ? 1.0 : 0.0;

  DenseCurve driven = dense_offset_curve(center, driven_field, scale);
  DenseCurve route_curve = dense_offset_curve(center, route_field, scale);

  // The scene is shifted so the driven path's station-0 point is the origin;
  // the grid axes stay aligned with the ideal centerline heading there.
  const Vec2 shift = driven.points[driven.anchor];
  translate_points(driven.points, shift);
  translate_points(route_curve.points, shift);
  const std::vector<Vec2>& driven_pts = driven.points;
  const std::vector<Vec2>& route_pts = route_curve.points;

  ScenarioSample sample;
  sample.kind = kind;
  sample.seed = seed;

  const double step = params.keyframe_spacing;
  // History: walk backward from the ego anchor, oldest waypoint first.
  std::vector<Vec2> back =
      chord_resample(driven_pts, driven.anchor, step, static_cast<std::size_t>(params.history_count - 1), false);
  sample.history.points.assign(back.rbegin(), back.rend());
  sample.history.points.push_back({0.0, 0.0});

  // Ground-truth future: first waypoint one spacing ahead of the ego.
  sample.future.points =
      chord_resample(driven_pts, driven.anchor, step, static_cast<std::size_t>(params.future_count), true);

  // Route keyframes bracket the ego station on the (independently jittered)
  // map curve: route_past points up to station 0, route_future beyond it.
  std::vector<Vec2> route_back = chord_resample(route_pts, route_curve.anchor, step,
                                                static_cast<std::size_t>(params.route_past - 1), false);
  std::vector<Vec2> route_fwd = chord_resample(route_pts, route_curve.anchor, step,
                                               static_cast<std::size_t>(params.route_future), true);
  sample.route.points.assign(route_back.rbegin(), route_back.rend());
  sample.route.points.push_back(route_pts[route_curve.anchor]);
  sample.route.points.insert(sample.route.points.end(), route_fwd.begin(), route_fwd.end());

  // Curbs: noisy offsets of the ideal centerline at both road edges.
  const double curb_step = 1.0 / params.curb_density;
  for (double side : {1.0, -1.0}) {
    for (double s = -kBackExtent; s <= kForwardExtent + 1e-9; s += curb_step) {
      const Vec2 p = center.at(s);
      const Vec2 n = unit_normal(center.at(s + 0.5 * kDenseStep) - center.at(s - 0.5 * kDenseStep));
      Vec2 q = p + n * (side * params.road_halfwidth) - shift;
      q.x += params.point_noise_sigma * rng.normal();
      q.y += params.point_noise_sigma * rng.normal();
      LidarPoint pt;
      pt.x = q.x;
      pt.y = q.y;
      pt.z = params.ground_z + rng.uniform(0.0, 0.25) + params.point_noise_sigma * rng.normal();
      pt.intensity = rng.uniform(0.4, 0.8);
      sample.cloud.points.push_back(pt);
    }
  }
  // Ground clutter across the grid extent.
  for (int i = 0; i < params.clutter_points; ++i) {
    LidarPoint pt;
    pt.x = rng.uniform(-16.0, 48.0);
    pt.y = rng.uniform(-32.0, 32.0);
    pt.z = params.ground_z + std::abs(rng.normal()) * 0.15;
    pt.intensity = rng.uniform(0.0, 1.0);
    sample.cloud.points.push_back(pt);
  }
  return sample;
}

Dataset make_dataset(const std::map<ScenarioKind, int>& counts, const GenParams& params,
                     std::uint64_t base_seed, const std::string& split,
                     std::string config_snapshot) {
  int total = 0;
  for (const auto& [kind, n] : counts) {
    if (n < 0) throw std::invalid_argument("make_dataset: negative count for " + to_string(kind));
    total += n;
  }
  if (total == 0) throw std::invalid_argument("make_dataset: zero total sample count");

  const std::uint64_t split_id = fnv1a64(split);
  Dataset ds;
  ds.split = split;
  ds.config_snapshot = std::move(config_snapshot);
  ds.samples.reserve(static_cast<std::size_t>(total));
  std::uint64_t index = 0;
  for (const auto& [kind, n] : counts) {
    for (int i = 0; i < n; ++i) {
      const std::uint64_t sample_seed = mix64(base_seed ^ mix64(split_id ^ mix64(index)));
      ds.samples.push_back(generate_scenario(kind, sample_seed, params));
      ++index;
    }
  }
  return ds;
}

namespace {

constexpr char kMagic[6] = {'R', 'D', 'D', 'S', 'E', 'T'};
constexpr std::uint16_t kVersion = 1;

void write_waypoints(std::ostream& os, const Polyline& line) {
  binio::write_u32(os, static_cast<std::uint32_t>(line.points.size()));
  for (Vec2 p : line.points) {
    binio::write_f64(os, p.x);
    binio::write_f64(os, p.y);
  }
}

Polyline read_waypoints(std::istream& is) {
  Polyline line;
  const std::uint32_t n = binio::read_u32(is, "waypoint count");
  line.points.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const double x = binio::read_f64(is, "waypoint");
    const double y = binio::read_f64(is, "waypoint");
    line.points.push_back({x, y});
  }
  return line;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_dataset: cannot open " + path);
  os.write(kMagic, sizeof(kMagic));
  binio::write_u16(os, kVersion);
  binio::write_string(os, ds.split);
  binio::write_u32(os, static_cast<std::uint32_t>(ds.config_snapshot.size()));
  os.write(ds.config_snapshot.data(), static_cast<std::streamsize>(ds.config_snapshot.size()));
  binio::write_u64(os, ds.samples.size());
  for (const ScenarioSample& s : ds.samples) {
    std::ostringstream record;
    binio::write_u8(record, static_cast<std::uint8_t>(s.kind));
    binio::write_u64(record, s.seed);
    binio::write_u32(record, static_cast<std::uint32_t>(s.cloud.points.size()));
    for (const LidarPoint& p : s.cloud.points) {
      binio::write_f64(record, p.x);
      binio::write_f64(record, p.y);
      binio::write_f64(record, p.z);
      binio::write_f64(record, p.intensity);
    }
    write_waypoints(record, s.history);
    write_waypoints(record, s.route);
    write_waypoints(record, s.future);
    const std::string payload = record.str();
    binio::write_u32(os, static_cast<std::uint32_t>(payload.size()));
    os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  }
  if (!os) throw std::runtime_error("save_dataset: write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_dataset: cannot open " + path);
  char magic[6];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("load_dataset: bad magic header in " + path);
  }
  const std::uint16_t version = binio::read_u16(is, "dataset version");
  if (version != kVersion) {
    throw std::runtime_error("load_dataset: unsupported format version " +
                             std::to_string(version) + " (expected " + std::to_string(kVersion) +
                             ")");
  }
  Dataset ds;
  ds.split = binio::read_string(is, "split tag");
  const std::uint32_t snap_len = binio::read_u32(is, "config snapshot length");
  ds.config_snapshot.resize(snap_len);
  if (snap_len > 0 && !is.read(ds.config_snapshot.data(), snap_len)) {
    binio::fail_truncated("config snapshot");
  }
  const std::uint64_t count = binio::read_u64(is, "sample count");
  ds.samples.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t record_len = binio::read_u32(is, "sample record length");
    std::string payload(record_len, '\0');
    if (record_len > 0 && !is.read(payload.data(), record_len)) {
      binio::fail_truncated("sample record");
    }
    std::istringstream record(payload);
    ScenarioSample s;
    const std::uint8_t kind_raw = binio::read_u8(record, "scenario kind");
    if (kind_raw > static_cast<std::uint8_t>(ScenarioKind::kTJunctionRight)) {
      throw std::runtime_error("load_dataset: invalid scenario kind value " +
                               std::to_string(kind_raw));
    }
    s.kind = static_cast<ScenarioKind>(kind_raw);
    s.seed = binio::read_u64(record, "sample seed");
    const std::uint32_t n_points = binio::read_u32(record, "point count");
    s.cloud.points.reserve(n_points);
    for (std::uint32_t p = 0; p < n_points; ++p) {
      LidarPoint pt;
      pt.x = binio::read_f64(record, "lidar point");
      pt.y = binio::read_f64(record, "lidar point");
      pt.z = binio::read_f64(record, "lidar point");
      pt.intensity = binio::read_f64(record, "lidar point");
      s.cloud.points.push_back(pt);
    }
    s.history = read_waypoints(record);
    s.route = read_waypoints(record);
    s.future = read_waypoints(record);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace routediff
