#pragma once

#include <cstdint>
#include <string>

#include "routediff/bev.hpp"
#include "routediff/diffusion.hpp"
#include "routediff/metrics.hpp"
#include "routediff/scenario.hpp"

namespace routediff {

// One flat run configuration covering data generation, training, and
// evaluation. Serializes to a `key = value` text file; parsing rejects
// unknown and duplicate keys, and the canonical text round-trips every field
// (doubles are printed with 17 significant digits).
struct RunConfig {
  // BEV grid
  int grid_height = 128;
  int grid_width = 128;
  double cell_size = 0.5;
  int ego_row = 96;
  int ego_col = 64;
  double z_min = -2.5;
  double z_max = 1.5;
  int density_cap = 16;
  double corridor_halfwidth = 3.0;

  // keyframes
  int history_count = 5;
  int future_count = 15;
  int route_past = 5;
  int route_future = 15;
  double keyframe_spacing = 2.0;

  // synthetic scenario generator
  double jitter_sigma = 0.2;
  double point_noise_sigma = 0.05;
  double road_halfwidth = 3.5;
  double curb_density = 4.0;
  int clutter_points = 200;
  int train_count = 512;
  int test_count = 128;

  // diffusion
  std::string schedule_kind = "cosine";
  int diffusion_steps = 10;
  double normalize_scale = 32.0;
  int embed_dim = 32;

  // training
  int epochs = 40;
  int batch_size = 8;
  double base_lr = 3e-3;
  double lambda_road = 0.1;

  // evaluation
  int samples_k = 5;
  double hit_threshold = 2.0;
  bool fde_mean_over_candidates = false;
  bool hd_min_over_candidates = false;
  int eval_threads = 2;

  // input-modality ablation: zeroed channels at train and eval time
  bool mask_history = false;
  bool mask_route = false;

  // seeds and paths
  std::uint64_t seed = 7;
  std::string train_dataset = "out/train.ds";
  std::string test_dataset = "out/test.ds";
  std::string checkpoint_path = "out/model.ckpt";

  std::string to_text() const;
  static RunConfig from_text(const std::string& text);
  void save(const std::string& path) const;
  static RunConfig load(const std::string& path);

  // FNV-1a over the canonical serialization; changes when any field changes.
  std::uint64_t hash() const;

  void validate() const;

  GridSpec grid_spec() const;
  LidarRasterParams lidar_params() const;
  GenParams gen_params() const;
  ScheduleKind schedule() const;
  MetricConventions conventions() const;

  bool operator==(const RunConfig&) const = default;
};

}  // namespace routediff
