#include "routediff/optim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace routediff {

AdamOptimizer::AdamOptimizer(std::vector<Tensor> params, Options opts)
    : params_(std::move(params)), opts_(opts) {
  if (params_.empty()) throw std::invalid_argument("AdamOptimizer: no parameters");
  first_moment_.reserve(params_.size());
  second_moment_.reserve(params_.size());
  for (const Tensor& p : params_) {
    if (!p.valid() || !p.requires_grad()) {
      throw std::invalid_argument("AdamOptimizer: parameters must require grad");
    }
    first_moment_.emplace_back(p.numel(), 0.0);
    second_moment_.emplace_back(p.numel(), 0.0);
  }
}

bool AdamOptimizer::step(double lr) {
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw std::invalid_argument("AdamOptimizer::step: lr must be positive and finite");
  }
  // Validate every gradient before touching any state.
  for (Tensor& p : params_) {
    if (!p.has_grad()) return false;
    for (double g : p.grad()) {
      if (!std::isfinite(g)) return false;
    }
  }

  ++step_count_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(step_count_));
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    auto data = params_[pi].data_mut();
    auto grad = params_[pi].grad();
    auto& m = first_moment_[pi];
    auto& v = second_moment_[pi];
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double g = grad[i];
      m[i] = opts_.beta1 * m[i] + (1.0 - opts_.beta1) * g;
      v[i] = opts_.beta2 * v[i] + (1.0 - opts_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      data[i] -= lr * mhat / (std::sqrt(vhat) + opts_.epsilon);
    }
  }
  return true;
}

void AdamOptimizer::zero_grad() {
  for (Tensor& p : params_) {
    if (p.has_grad()) p.zero_grad();
  }
}

double cosine_lr(int epoch, int total_epochs, double base_lr) {
  if (total_epochs <= 0) {
    throw std::invalid_argument("cosine_lr: total_epochs must be positive, got " +
                                std::to_string(total_epochs));
  }
  if (epoch < 0 || epoch >= total_epochs) {
    throw std::invalid_argument("cosine_lr: epoch " + std::to_string(epoch) +
                                " outside [0, " + std::to_string(total_epochs) + ")");
  }
  const double phase = std::numbers::pi * static_cast<double>(epoch) /
                       static_cast<double>(total_epochs);
  return base_lr * 0.5 * (1.0 + std::cos(phase));
}

}  // namespace routediff
