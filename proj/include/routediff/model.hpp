#pragma once

#include <memory>
#include <string>
#include <vector>

#include "routediff/config.hpp"
#include "routediff/diffusion.hpp"
#include "routediff/encoder.hpp"
#include "routediff/scenario.hpp"

namespace routediff {

// Encoder + denoiser with one unified parameter manifest and checkpoint.
struct Model {
  ConditioningEncoder encoder;
  Denoiser denoiser;

  explicit Model(const RunConfig& cfg);

  void init_params(Rng& rng);
  std::vector<NamedParam> named_params() const;

  void save(const std::string& path) const;
  // Shapes are derived from cfg; a checkpoint trained under a different
  // architecture is rejected with a field-level manifest diff.
  void load(const std::string& path);
};

// Scenario -> aligned 5-channel input tensor. Ablation masks zero out the
// history and/or route channels.
Tensor build_input_tensor(const ScenarioSample& sample, const RunConfig& cfg);

// Scenario -> ground-truth road mask at the encoder's segmentation resolution.
Tensor build_gt_mask(const ScenarioSample& sample, const RunConfig& cfg);

}  // namespace routediff
