#pragma once

#include <cstddef>
#include <vector>

#include "routediff/geometry.hpp"

namespace routediff {

// K candidate trajectories scored against one ground truth. All candidates
// must share the ground truth's horizon.
struct PredictionSet {
  std::vector<std::vector<Vec2>> candidates;
  std::vector<Vec2> ground_truth;
};

struct MetricConventions {
  // Final-displacement error of a K-set: min over candidates by default,
  // mean over candidates behind this flag.
  bool fde_mean_over_candidates = false;
  // Hausdorff of a K-set: the minADE-selected candidate by default, min over
  // candidates behind this flag.
  bool hd_min_over_candidates = false;
};

// Euclidean distance between the final waypoints.
double fde(const std::vector<Vec2>& candidate, const std::vector<Vec2>& ground_truth);

// Mean waypoint displacement of a single candidate.
double ade(const std::vector<Vec2>& candidate, const std::vector<Vec2>& ground_truth);

// Minimum ADE over candidates; ties keep the lowest index.
double min_ade(const PredictionSet& set);
std::size_t min_ade_index(const PredictionSet& set);

// Discrete symmetric Hausdorff distance over the waypoint sets.
double hausdorff(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

// Indicator of min over candidates of (max over waypoints of displacement)
// being strictly below d.
bool hit_indicator(const PredictionSet& set, double d);

// Fraction of sets whose indicator fires; d must be positive.
double hit_rate(const std::vector<PredictionSet>& sets, double d);

struct SampleScore {
  double fde = 0.0;
  double min_ade = 0.0;
  double hd = 0.0;
  bool hit = false;
};

SampleScore score_prediction_set(const PredictionSet& set, double d,
                                 const MetricConventions& conventions = {});

struct MetricsReport {
  std::vector<SampleScore> per_sample;
  std::vector<double> infer_time_s;  // wall clock per sample; not part of the
                                     // deterministic metric payload
  double mean_fde = 0.0;
  double mean_min_ade = 0.0;
  double hit_rate = 0.0;
  double mean_hd = 0.0;
  double mean_infer_time_s = 0.0;
  int k = 0;
  double d = 0.0;
};

// Dataset-level aggregation. Every set must carry the same candidate count;
// `times` is either empty or one entry per set.
MetricsReport evaluate(const std::vector<PredictionSet>& sets, double d,
                       const MetricConventions& conventions = {},
                       const std::vector<double>& times = {});

}  // namespace routediff
