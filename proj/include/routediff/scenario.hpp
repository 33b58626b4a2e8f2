#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "routediff/bev.hpp"
#include "routediff/geometry.hpp"
#include "routediff/rng.hpp"

namespace routediff {

enum class ScenarioKind : std::uint8_t {
  kStraight = 0,
  kCurveLeft = 1,
  kCurveRight = 2,
  kTJunctionLeft = 3,
  kTJunctionRight = 4,
};

inline constexpr std::array<ScenarioKind, 5> kAllScenarioKinds = {
    ScenarioKind::kStraight, ScenarioKind::kCurveLeft, ScenarioKind::kCurveRight,
    ScenarioKind::kTJunctionLeft, ScenarioKind::kTJunctionRight};

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& name);

struct GenParams {
  double keyframe_spacing = 2.0;  // meters between keyframes
  int history_count = 5;          // waypoints, ends at the ego position
  int future_count = 15;          // ground-truth horizon
  int route_past = 5;             // route keyframes up to and including station 0
  int route_future = 15;
  double jitter_sigma = 0.2;        // lateral deviation of driven path and route
  double point_noise_sigma = 0.05;  // per-lidar-point position noise
  double road_halfwidth = 3.5;
  double curb_density = 4.0;  // curb points per meter per side
  int clutter_points = 200;
  double ground_z = -1.7;  // sensor-frame height of the road surface
  double curve_radius_min = 15.0;
  double curve_radius_max = 60.0;
  double junction_radius = 7.0;  // corner arc of the 90-degree turn
};

// One synthetic record: lidar cloud, ego history, topometric route, and the
// ground-truth future, all in the ego frame (ego at origin, heading +x).
struct ScenarioSample {
  ScenarioKind kind = ScenarioKind::kStraight;
  std::uint64_t seed = 0;
  PointCloud cloud;
  Polyline history;  // history_count waypoints, 2 m chords, last one at the origin
  Polyline route;    // route_past + route_future waypoints, 2 m chords
  Polyline future;   // future_count waypoints starting 2 m ahead
};

struct Dataset {
  std::string split;            // "train" or "test"
  std::string config_snapshot;  // generation config, canonical text
  std::vector<ScenarioSample> samples;
};

// Deterministic in (kind, seed, params); all randomness from the derived
// per-sample stream.
ScenarioSample generate_scenario(ScenarioKind kind, std::uint64_t seed, const GenParams& params);

// counts: samples per kind. Per-sample seeds mix (base_seed, split, index)
// so train/test streams never collide.
Dataset make_dataset(const std::map<ScenarioKind, int>& counts, const GenParams& params,
                     std::uint64_t base_seed, const std::string& split,
                     std::string config_snapshot);

// Binary container with magic, version, and length-prefixed sample records.
// Round-trips bit-exactly. Corrupt header, version mismatch, and truncation
// are reported as distinct errors.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace routediff
