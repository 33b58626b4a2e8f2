#pragma once

#include <cstdint>
#include <vector>

#include "routediff/tensor.hpp"

namespace routediff {

// Adam with bias correction. Moment buffers are laid out per parameter in the
// order the parameters were registered; the step counter is shared.
class AdamOptimizer {
 public:
  struct Options {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  explicit AdamOptimizer(std::vector<Tensor> params) : AdamOptimizer(std::move(params), Options()) {}
  AdamOptimizer(std::vector<Tensor> params, Options opts);

  // Applies one update using each parameter's accumulated .grad. If any
  // gradient value is non-finite the step is rejected: parameters and
  // optimizer state stay untouched and false is returned.
  [[nodiscard]] bool step(double lr);

  void zero_grad();
  std::uint64_t step_count() const { return step_count_; }
  const std::vector<Tensor>& params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
  Options opts_;
  std::uint64_t step_count_ = 0;
};

// base_lr * 0.5 * (1 + cos(pi * epoch / total_epochs)); strictly decreasing
// over [0, total_epochs). Rejects total_epochs <= 0 and out-of-range epochs.
double cosine_lr(int epoch, int total_epochs, double base_lr);

}  // namespace routediff
