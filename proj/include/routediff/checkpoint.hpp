#pragma once

#include <string>
#include <vector>

#include "routediff/tensor.hpp"

namespace routediff {

struct NamedParam {
  std::string name;
  Tensor tensor;
};

// Flat binary checkpoint: magic, format version, a manifest of (name, shape)
// per parameter, then the raw little-endian float64 payloads in manifest
// order. Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const std::vector<NamedParam>& params);

// Fills `params` in place. Every manifest entry must match the expected
// name and shape; mismatches are reported as a field-level diff listing
// each offending entry.
void load_checkpoint(const std::string& path, std::vector<NamedParam>& params);

}  // namespace routediff
