#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "routediff/checkpoint.hpp"
#include "routediff/geometry.hpp"
#include "routediff/rng.hpp"
#include "routediff/tensor.hpp"

namespace routediff {

enum class ScheduleKind { kCosine, kLinear };

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& name);

// Cumulative signal coefficients gamma_1..gamma_T (gamma_0 == 1), strictly
// decreasing in (0, 1), with derived per-step alphas and posterior sigmas.
struct NoiseSchedule {
  int steps = 0;
  std::vector<double> gamma;
  std::vector<double> alpha;  // alpha_t = gamma_t / gamma_{t-1}
  std::vector<double> sigma;  // posterior std; sigma_1 == 0

  double gamma_at(int t) const;  // t in 0..T, gamma_0 == 1
  double alpha_at(int t) const;  // t in 1..T
  double sigma_at(int t) const;  // t in 1..T
};

// Cosine kind: gamma_t = cos^2(((t/T + s)/(1+s)) * pi/2) / cos^2((s/(1+s)) * pi/2)
// with s = 0.008 and per-step alphas clipped to >= 0.001. Linear kind:
// gamma_t = 1 - t/(T+1).
NoiseSchedule build_schedule(int steps, ScheduleKind kind);

// Trajectories diffuse in unit scale: both coordinates divided by `scale`
// meters. The default 32 is a power of two, so the round trip is bit-exact.
std::vector<Vec2> normalize_trajectory(const std::vector<Vec2>& pts, double scale);
std::vector<Vec2> denormalize_trajectory(const std::vector<Vec2>& pts, double scale);

// tau_t = sqrt(gamma_t) * tau0 + sqrt(1 - gamma_t) * eps, elementwise.
// tau0 is in normalized scale; eps is a caller-supplied standard-normal draw.
std::vector<Vec2> forward_diffuse(const std::vector<Vec2>& tau0_normalized, int t,
                                  const std::vector<Vec2>& eps, const NoiseSchedule& sched);

// Sinusoidal encoding, interleaved (sin, cos) pairs with frequencies
// 10000^(-2j/dim); dim must be even.
std::vector<double> timestep_embedding(int t, int dim);

// 1-D conv U-Net over the waypoint sequence (2 channels x T_f), two strided
// down levels and two up levels (channels 2 -> 32 -> 64 -> 32 -> 2) with skip
// connections. [timestep embedding ++ condition] is projected per level and
// added as a per-channel shift.
class Denoiser {
 public:
  Denoiser(int t_future, int embed_dim, int cond_dim);

  void init_params(Rng& rng);
  std::vector<NamedParam> named_params(const std::string& prefix) const;

  // tau_t in normalized scale; returns the predicted noise as a (2, T_f)
  // tensor connected to the parameter (and condition) graph.
  Tensor predict_noise(const std::vector<Vec2>& tau_t, int t, const Tensor& condition,
                       const NoiseSchedule& sched) const;

  int t_future() const { return t_future_; }
  int embed_dim() const { return embed_dim_; }
  int cond_dim() const { return cond_dim_; }

 private:
  int t_future_;
  int embed_dim_;
  int cond_dim_;
  // Two convs per level; the first conv of each level takes the FiLM shift.
  Tensor wd1_, bd1_, wd1b_, bd1b_;  // 2 -> 32 stride 2, 32 -> 32
  Tensor wd2_, bd2_, wd2b_, bd2b_;  // 32 -> 64 stride 2, 64 -> 64
  Tensor wu1_, bu1_, wu1b_, bu1b_;  // 64 -> 32 after shuffle + skip, 32 -> 32
  Tensor wout_, bout_;              // 18 -> 2 after shuffle + input skip
  Tensor film1_w_, film1_b_;        // cond -> 32
  Tensor film2_w_, film2_b_;        // cond -> 64
  Tensor film3_w_, film3_b_;        // cond -> 32
};

// One training-sample pair: normalized ground-truth future plus the
// conditioning tensor it was encoded from.
struct DiffusionExample {
  std::vector<Vec2> tau0_normalized;
  Tensor condition;
};

using NoisePredictor =
    std::function<Tensor(const std::vector<Vec2>& tau_t, int t, const Tensor& condition)>;

// Mean over batch and coordinates of (eps - eps_hat)^2 with t ~ U{1..T} and
// eps ~ N(0, I) drawn from `rng` per sample. Result stays connected to the
// denoiser and condition graphs.
Tensor diffusion_loss(const std::vector<DiffusionExample>& batch, Rng& rng,
                      const NoiseSchedule& sched, const Denoiser& denoiser);
// Same loss against any noise predictor (lets tests swap in oracles).
Tensor diffusion_loss_with(const std::vector<DiffusionExample>& batch, Rng& rng,
                           const NoiseSchedule& sched, const NoisePredictor& predictor);

// L_total = L_diffusion + lambda_road * L_road; lambda_road must be >= 0.
Tensor total_loss(const Tensor& diffusion, const Tensor& road, double lambda_road);

// tau_{t-1} = (tau_t - (1-alpha_t)/sqrt(1-gamma_t) * eps_hat) / sqrt(alpha_t)
//             + sigma_t * z.
// z is required for t > 1 and must be absent at t = 1.
std::vector<Vec2> reverse_step(const std::vector<Vec2>& tau_t, int t,
                               const std::vector<Vec2>& eps_hat, const NoiseSchedule& sched,
                               const std::optional<std::vector<Vec2>>& z);

// K independent reverse chains from tau_T ~ N(0, I); returns denormalized
// trajectories in meters. Chain k draws from the stream derived from
// (seed, item_id, k), so prefixes of a K-sample set are reproducible.
std::vector<std::vector<Vec2>> sample_trajectories(const Tensor& condition, int k,
                                                   const Denoiser& denoiser,
                                                   const NoiseSchedule& sched, double scale,
                                                   std::uint64_t seed, std::uint64_t item_id);

}  // namespace routediff
