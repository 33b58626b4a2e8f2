#include "routediff/metrics.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace routediff {

namespace {

void validate_pair(const std::vector<Vec2>& candidate, const std::vector<Vec2>& ground_truth,
                   const char* op) {
  if (candidate.empty() || ground_truth.empty()) {
    throw std::invalid_argument(std::string(op) + ": empty trajectory");
  }
  if (candidate.size() != ground_truth.size()) {
    throw std::invalid_argument(std::string(op) + ": horizon mismatch, " +
                                std::to_string(candidate.size()) + " vs " +
                                std::to_string(ground_truth.size()));
  }
}

void validate_set(const PredictionSet& set, const char* op) {
  if (set.candidates.empty()) {
    throw std::invalid_argument(std::string(op) + ": prediction set has no candidates");
  }
  for (const auto& c : set.candidates) validate_pair(c, set.ground_truth, op);
}

}  // namespace

double fde(const std::vector<Vec2>& candidate, const std::vector<Vec2>& ground_truth) {
  validate_pair(candidate, ground_truth, "fde");
  return distance(candidate.back(), ground_truth.back());
}

double ade(const std::vector<Vec2>& candidate, const std::vector<Vec2>& ground_truth) {
  validate_pair(candidate, ground_truth, "ade");
  double acc = 0.0;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    acc += distance(candidate[i], ground_truth[i]);
  }
  return acc / static_cast<double>(candidate.size());
}

std::size_t min_ade_index(const PredictionSet& set) {
  validate_set(set, "min_ade");
  std::size_t best = 0;
  double best_ade = ade(set.candidates[0], set.ground_truth);
  for (std::size_t k = 1; k < set.candidates.size(); ++k) {
    const double a = ade(set.candidates[k], set.ground_truth);
    if (a < best_ade) {
      best_ade = a;
      best = k;
    }
  }
  return best;
}

double min_ade(const PredictionSet& set) {
  return ade(set.candidates[min_ade_index(set)], set.ground_truth);
}

double hausdorff(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("hausdorff: empty waypoint set");
  double worst = 0.0;
  for (const std::vector<Vec2>* from : {&a, &b}) {
    const std::vector<Vec2>& to = from == &a ? b : a;
    for (Vec2 p : *from) {
      double nearest = std::numeric_limits<double>::infinity();
      for (Vec2 q : to) nearest = std::min(nearest, distance(p, q));
      worst = std::max(worst, nearest);
    }
  }
  return worst;
}

bool hit_indicator(const PredictionSet& set, double d) {
  validate_set(set, "hit_indicator");
  if (!(d > 0.0)) throw std::invalid_argument("hit_indicator: threshold must be positive");
  double best_worst = std::numeric_limits<double>::infinity();
  for (const auto& c : set.candidates) {
    double worst = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      worst = std::max(worst, distance(c[i], set.ground_truth[i]));
    }
    best_worst = std::min(best_worst, worst);
  }
  return best_worst < d;
}

double hit_rate(const std::vector<PredictionSet>& sets, double d) {
  if (sets.empty()) throw std::invalid_argument("hit_rate: empty prediction list");
  if (!(d > 0.0)) throw std::invalid_argument("hit_rate: threshold must be positive");
  std::size_t hits = 0;
  for (const PredictionSet& s : sets) {
    if (hit_indicator(s, d)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(sets.size());
}

SampleScore score_prediction_set(const PredictionSet& set, double d,
                                 const MetricConventions& conventions) {
  validate_set(set, "score_prediction_set");
  SampleScore score;
  const std::size_t best = min_ade_index(set);
  score.min_ade = ade(set.candidates[best], set.ground_truth);

  if (conventions.fde_mean_over_candidates) {
    double acc = 0.0;
    for (const auto& c : set.candidates) acc += fde(c, set.ground_truth);
    score.fde = acc / static_cast<double>(set.candidates.size());
  } else {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : set.candidates) m = std::min(m, fde(c, set.ground_truth));
    score.fde = m;
  }

  if (conventions.hd_min_over_candidates) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : set.candidates) m = std::min(m, hausdorff(c, set.ground_truth));
    score.hd = m;
  } else {
    score.hd = hausdorff(set.candidates[best], set.ground_truth);
  }

  score.hit = hit_indicator(set, d);
  return score;
}

MetricsReport evaluate(const std::vector<PredictionSet>& sets, double d,
                       const MetricConventions& conventions, const std::vector<double>& times) {
  if (sets.empty()) throw std::invalid_argument("evaluate: empty prediction list");
  if (!times.empty() && times.size() != sets.size()) {
    throw std::invalid_argument("evaluate: timing list length mismatch");
  }
  const std::size_t k = sets.front().candidates.size();
  for (const PredictionSet& s : sets) {
    if (s.candidates.size() != k) {
      throw std::invalid_argument("evaluate: inconsistent candidate count, expected " +
                                  std::to_string(k) + ", got " +
                                  std::to_string(s.candidates.size()));
    }
  }

  MetricsReport report;
  report.k = static_cast<int>(k);
  report.d = d;
  report.per_sample.reserve(sets.size());
  report.infer_time_s = times;
  std::size_t hits = 0;
  for (const PredictionSet& s : sets) {
    const SampleScore score = score_prediction_set(s, d, conventions);
    report.mean_fde += score.fde;
    report.mean_min_ade += score.min_ade;
    report.mean_hd += score.hd;
    if (score.hit) ++hits;
    report.per_sample.push_back(score);
  }
  const double n = static_cast<double>(sets.size());
  report.mean_fde /= n;
  report.mean_min_ade /= n;
  report.mean_hd /= n;
  report.hit_rate = static_cast<double>(hits) / n;
  if (!times.empty()) {
    for (double t : times) report.mean_infer_time_s += t;
    report.mean_infer_time_s /= n;
  }
  return report;
}

}  // namespace routediff
