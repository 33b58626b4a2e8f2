#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "routediff/bev.hpp"
#include "routediff/checkpoint.hpp"
#include "routediff/rng.hpp"
#include "routediff/tensor.hpp"

namespace routediff {

// Two-stage conditioning encoder. Stage 1 is a strided conv stack
// (5 -> 16 -> 32 -> 32 -> 1) that downsamples the BEV input by 4x and emits a
// one-channel road logit map; stage 2 (1 -> 8 -> 16 -> 1) compresses the
// sigmoid of that map by another 4x and flattens it into the conditioning
// vector. The supervision branch (mask loss) on top of the logit map is
// evaluated only during training; see road_seg_loss and the eval counter.
class ConditioningEncoder {
 public:
  // Grid dimensions must be divisible by 16.
  ConditioningEncoder(int grid_h, int grid_w);

  void init_params(Rng& rng);
  std::vector<NamedParam> named_params(const std::string& prefix) const;

  struct Output {
    Tensor seg_logits;  // (1, H/4, W/4)
    Tensor condition;   // (H/16 * W/16)
  };
  // Deterministic; input shape must be (5, grid_h, grid_w).
  Output encode(const Tensor& input) const;

  int seg_h() const { return grid_h_ / 4; }
  int seg_w() const { return grid_w_ / 4; }
  int condition_size() const { return (grid_h_ / 16) * (grid_w_ / 16); }

 private:
  int grid_h_;
  int grid_w_;
  // Stage-1 backbone plus the road-logit conv.
  Tensor w1_, b1_, w2_, b2_, w3_, b3_, w4_, b4_;
  // Stage-2 compressor.
  Tensor v1_, c1_, v2_, c2_, v3_, c3_;
};

// Summed pixel-wise binary cross-entropy between sigmoid(seg_logits) and a
// {0,1} mask, computed in stable logit form. This is the segmentation
// supervision branch: every call bumps the eval counter checked by the
// inference paths.
Tensor road_seg_loss(const Tensor& seg_logits, const Tensor& gt_mask);

// Ground-truth supervision target: corridor raster of the recorded future
// trajectory at full grid resolution, max-pooled down to (out_h, out_w).
// Values are exactly 0 or 1.
Tensor rasterize_gt_road_mask(const Polyline& future, const GridSpec& spec, double width,
                              int out_h, int out_w);

std::uint64_t seg_supervision_eval_count();
void reset_seg_supervision_eval_count();

}  // namespace routediff
