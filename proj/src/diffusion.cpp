#include "routediff/diffusion.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace routediff {

std::string to_string(ScheduleKind kind) {
  return kind == ScheduleKind::kCosine ? "cosine" : "linear";
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
  if (name == "cosine") return ScheduleKind::kCosine;
  if (name == "linear") return ScheduleKind::kLinear;
  throw std::invalid_argument("unknown schedule kind '" + name + "'");
}

double NoiseSchedule::gamma_at(int t) const {
  if (t < 0 || t > steps) throw std::invalid_argument("gamma_at: step out of range");
  return t == 0 ? 1.0 : gamma[static_cast<std::size_t>(t) - 1];
}

double NoiseSchedule::alpha_at(int t) const {
  if (t < 1 || t > steps) throw std::invalid_argument("alpha_at: step out of range");
  return alpha[static_cast<std::size_t>(t) - 1];
}

double NoiseSchedule::sigma_at(int t) const {
  if (t < 1 || t > steps) throw std::invalid_argument("sigma_at: step out of range");
  return sigma[static_cast<std::size_t>(t) - 1];
}

NoiseSchedule build_schedule(int steps, ScheduleKind kind) {
  if (steps < 1) {
    throw std::invalid_argument("build_schedule: need at least 1 step, got " +
                                std::to_string(steps));
  }
  NoiseSchedule sched;
  sched.steps = steps;
  sched.gamma.resize(static_cast<std::size_t>(steps));
  sched.alpha.resize(static_cast<std::size_t>(steps));
  sched.sigma.resize(static_cast<std::size_t>(steps));

  double prev_gamma = 1.0;
  for (int t = 1; t <= steps; ++t) {
    double a;
    if (kind == ScheduleKind::kCosine) {
      constexpr double s = 0.008;
      const auto f = [&](double u) {
        const double c = std::cos((u / steps + s) / (1.0 + s) * std::numbers::pi / 2.0);
        return c * c;
      };
      a = f(static_cast<double>(t)) / f(static_cast<double>(t) - 1.0);
      a = std::max(a, 0.001);  // keep every alpha strictly positive
    } else {
      // Linear decay of the cumulative coefficient: gamma_t = 1 - t/(T+1).
      const double g = 1.0 - static_cast<double>(t) / (steps + 1);
      a = g / prev_gamma;
    }
    const double g = prev_gamma * a;
    sched.alpha[static_cast<std::size_t>(t) - 1] = a;
    sched.gamma[static_cast<std::size_t>(t) - 1] = g;
    const double var =
        t == 1 ? 0.0 : (1.0 - prev_gamma) / (1.0 - g) * (1.0 - a);
    sched.sigma[static_cast<std::size_t>(t) - 1] = std::sqrt(std::max(var, 0.0));
    prev_gamma = g;
  }
  return sched;
}

std::vector<Vec2> normalize_trajectory(const std::vector<Vec2>& pts, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("normalize_trajectory: scale must be positive");
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (Vec2 p : pts) out.push_back({p.x / scale, p.y / scale});
  return out;
}

std::vector<Vec2> denormalize_trajectory(const std::vector<Vec2>& pts, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("denormalize_trajectory: scale must be positive");
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (Vec2 p : pts) out.push_back({p.x * scale, p.y * scale});
  return out;
}

std::vector<Vec2> forward_diffuse(const std::vector<Vec2>& tau0_normalized, int t,
                                  const std::vector<Vec2>& eps, const NoiseSchedule& sched) {
  if (t < 1 || t > sched.steps) {
    throw std::invalid_argument("forward_diffuse: step " + std::to_string(t) +
                                " outside [1, " + std::to_string(sched.steps) + "]");
  }
  if (eps.size() != tau0_normalized.size()) {
    throw std::invalid_argument("forward_diffuse: noise length mismatch");
  }
  const double g = sched.gamma_at(t);
  const double signal = std::sqrt(g);
  const double noise = std::sqrt(1.0 - g);
  std::vector<Vec2> out;
  out.reserve(tau0_normalized.size());
  for (std::size_t i = 0; i < tau0_normalized.size(); ++i) {
    out.push_back({signal * tau0_normalized[i].x + noise * eps[i].x,
                   signal * tau0_normalized[i].y + noise * eps[i].y});
  }
  return out;
}

std::vector<double> timestep_embedding(int t, int dim) {
  if (dim <= 0 || dim % 2 != 0) {
    throw std::invalid_argument("timestep_embedding: dim must be positive and even, got " +
                                std::to_string(dim));
  }
  std::vector<double> emb(static_cast<std::size_t>(dim));
  for (int j = 0; j < dim / 2; ++j) {
    const double omega = std::pow(10000.0, -2.0 * j / dim);
    emb[static_cast<std::size_t>(2 * j)] = std::sin(t * omega);
    emb[static_cast<std::size_t>(2 * j) + 1] = std::cos(t * omega);
  }
  return emb;
}

namespace {

Tensor xavier_conv1d(int cout, int cin, int k, Rng& rng) {
  const double bound =
      std::sqrt(6.0 / (static_cast<double>(cin) * k + static_cast<double>(cout) * k));
  std::vector<double> w(static_cast<std::size_t>(cout) * cin * k);
  for (double& v : w) v = rng.uniform(-bound, bound);
  return Tensor::from_data({cout, cin, k}, std::move(w), true);
}

Tensor xavier_linear(int in, int out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (static_cast<double>(in) + out));
  std::vector<double> w(static_cast<std::size_t>(in) * out);
  for (double& v : w) v = rng.uniform(-bound, bound);
  return Tensor::from_data({in, out}, std::move(w), true);
}

Tensor waypoints_to_tensor(const std::vector<Vec2>& pts) {
  const int n = static_cast<int>(pts.size());
  std::vector<double> data(static_cast<std::size_t>(2) * n);
  for (int i = 0; i < n; ++i) {
    data[static_cast<std::size_t>(i)] = pts[static_cast<std::size_t>(i)].x;
    data[static_cast<std::size_t>(n) + i] = pts[static_cast<std::size_t>(i)].y;
  }
  return Tensor::from_data({2, n}, std::move(data));
}

}  // namespace

Denoiser::Denoiser(int t_future, int embed_dim, int cond_dim)
    : t_future_(t_future), embed_dim_(embed_dim), cond_dim_(cond_dim) {
  if (t_future < 4) throw std::invalid_argument("Denoiser: horizon must be at least 4 waypoints");
  if (embed_dim <= 0 || embed_dim % 2 != 0) {
    throw std::invalid_argument("Denoiser: embed_dim must be positive and even");
  }
  if (cond_dim <= 0) throw std::invalid_argument("Denoiser: cond_dim must be positive");
  const int film_in = embed_dim + cond_dim;
  wd1_ = Tensor::zeros({32, 2, 5}, true);
  bd1_ = Tensor::zeros({32}, true);
  wd1b_ = Tensor::zeros({32, 32, 5}, true);
  bd1b_ = Tensor::zeros({32}, true);
  wd2_ = Tensor::zeros({64, 32, 5}, true);
  bd2_ = Tensor::zeros({64}, true);
  wd2b_ = Tensor::zeros({64, 64, 5}, true);
  bd2b_ = Tensor::zeros({64}, true);
  wu1_ = Tensor::zeros({32, 64, 5}, true);  // shuffled d2 (32) + skip d1 (32)
  bu1_ = Tensor::zeros({32}, true);
  wu1b_ = Tensor::zeros({32, 32, 5}, true);
  bu1b_ = Tensor::zeros({32}, true);
  wout_ = Tensor::zeros({2, 18, 5}, true);  // shuffled u1 (16) + input skip (2)
  bout_ = Tensor::zeros({2}, true);
  film1_w_ = Tensor::zeros({film_in, 32}, true);
  film1_b_ = Tensor::zeros({32}, true);
  film2_w_ = Tensor::zeros({film_in, 64}, true);
  film2_b_ = Tensor::zeros({64}, true);
  film3_w_ = Tensor::zeros({film_in, 32}, true);
  film3_b_ = Tensor::zeros({32}, true);
}

void Denoiser::init_params(Rng& rng) {
  const int film_in = embed_dim_ + cond_dim_;
  wd1_ = xavier_conv1d(32, 2, 5, rng);
  wd1b_ = xavier_conv1d(32, 32, 5, rng);
  wd2_ = xavier_conv1d(64, 32, 5, rng);
  wd2b_ = xavier_conv1d(64, 64, 5, rng);
  wu1_ = xavier_conv1d(32, 64, 5, rng);
  wu1b_ = xavier_conv1d(32, 32, 5, rng);
  wout_ = xavier_conv1d(2, 18, 5, rng);
  film1_w_ = xavier_linear(film_in, 32, rng);
  film2_w_ = xavier_linear(film_in, 64, rng);
  film3_w_ = xavier_linear(film_in, 32, rng);
}

std::vector<NamedParam> Denoiser::named_params(const std::string& prefix) const {
  return {
      {prefix + ".down1.w", wd1_},   {prefix + ".down1.b", bd1_},
      {prefix + ".down1b.w", wd1b_}, {prefix + ".down1b.b", bd1b_},
      {prefix + ".down2.w", wd2_},   {prefix + ".down2.b", bd2_},
      {prefix + ".down2b.w", wd2b_}, {prefix + ".down2b.b", bd2b_},
      {prefix + ".up1.w", wu1_},     {prefix + ".up1.b", bu1_},
      {prefix + ".up1b.w", wu1b_},   {prefix + ".up1b.b", bu1b_},
      {prefix + ".out.w", wout_},    {prefix + ".out.b", bout_},
      {prefix + ".film1.w", film1_w_}, {prefix + ".film1.b", film1_b_},
      {prefix + ".film2.w", film2_w_}, {prefix + ".film2.b", film2_b_},
      {prefix + ".film3.w", film3_w_}, {prefix + ".film3.b", film3_b_},
  };
}

Tensor Denoiser::predict_noise(const std::vector<Vec2>& tau_t, int t, const Tensor& condition,
                               const NoiseSchedule& sched) const {
  if (static_cast<int>(tau_t.size()) != t_future_) {
    throw std::invalid_argument("predict_noise: trajectory length " +
                                std::to_string(tau_t.size()) + " does not match horizon " +
                                std::to_string(t_future_));
  }
  if (condition.shape() != Shape{cond_dim_}) {
    throw std::invalid_argument("predict_noise: condition shape " +
                                shape_str(condition.shape()) + " does not match expected " +
                                shape_str({cond_dim_}));
  }
  if (t < 1 || t > sched.steps) {
    throw std::invalid_argument("predict_noise: step out of range");
  }

  const Tensor x = waypoints_to_tensor(tau_t);  // (2, T_f)
  const Tensor emb = Tensor::from_data({embed_dim_}, timestep_embedding(t, embed_dim_));
  const Tensor cond = reshape(concat({emb, condition}), {1, embed_dim_ + cond_dim_});

  const auto film = [&](const Tensor& w, const Tensor& b) {
    return add(reshape(matmul(cond, w), {static_cast<int>(w.shape()[1])}), b);
  };

  const Tensor d1a = relu(add_channel_bias(conv1d(x, wd1_, bd1_, 2, 2), film(film1_w_, film1_b_)));
  const Tensor d1 = relu(conv1d(d1a, wd1b_, bd1b_, 1, 2));
  const Tensor d2a = relu(add_channel_bias(conv1d(d1, wd2_, bd2_, 2, 2), film(film2_w_, film2_b_)));
  const Tensor d2 = relu(conv1d(d2a, wd2b_, bd2b_, 1, 2));
  const Tensor u1_in = concat({pixel_shuffle1d(d2), d1});
  const Tensor u1a = relu(add_channel_bias(conv1d(u1_in, wu1_, bu1_, 1, 2), film(film3_w_, film3_b_)));
  const Tensor u1 = relu(conv1d(u1a, wu1b_, bu1b_, 1, 2));
  const Tensor u2_in = concat({crop1d(pixel_shuffle1d(u1), t_future_), x});
  return conv1d(u2_in, wout_, bout_, 1, 2);  // (2, T_f)
}

Tensor diffusion_loss_with(const std::vector<DiffusionExample>& batch, Rng& rng,
                           const NoiseSchedule& sched, const NoisePredictor& predictor) {
  if (batch.empty()) throw std::invalid_argument("diffusion_loss: empty batch");
  Tensor acc;
  for (const DiffusionExample& ex : batch) {
    const int t = rng.uniform_int(1, sched.steps);
    std::vector<Vec2> eps(ex.tau0_normalized.size());
    for (Vec2& e : eps) e = {rng.normal(), rng.normal()};
    const std::vector<Vec2> tau_t = forward_diffuse(ex.tau0_normalized, t, eps, sched);
    const Tensor eps_hat = predictor(tau_t, t, ex.condition);
    const Tensor diff = sub(waypoints_to_tensor(eps), eps_hat);
    const Tensor sample_loss = mean(mul(diff, diff));
    acc = acc.valid() ? add(acc, sample_loss) : sample_loss;
  }
  return scale(acc, 1.0 / static_cast<double>(batch.size()));
}

Tensor diffusion_loss(const std::vector<DiffusionExample>& batch, Rng& rng,
                      const NoiseSchedule& sched, const Denoiser& denoiser) {
  return diffusion_loss_with(batch, rng, sched,
                             [&](const std::vector<Vec2>& tau_t, int t, const Tensor& condition) {
                               return denoiser.predict_noise(tau_t, t, condition, sched);
                             });
}

Tensor total_loss(const Tensor& diffusion, const Tensor& road, double lambda_road) {
  if (lambda_road < 0.0) throw std::invalid_argument("total_loss: lambda_road must be >= 0");
  return add(diffusion, scale(road, lambda_road));
}

std::vector<Vec2> reverse_step(const std::vector<Vec2>& tau_t, int t,
                               const std::vector<Vec2>& eps_hat, const NoiseSchedule& sched,
                               const std::optional<std::vector<Vec2>>& z) {
  if (t < 1 || t > sched.steps) {
    throw std::invalid_argument("reverse_step: step " + std::to_string(t) + " outside [1, " +
                                std::to_string(sched.steps) + "]");
  }
  if (t == 1 && z.has_value()) {
    throw std::invalid_argument("reverse_step: noise draw is forbidden at t = 1");
  }
  if (t > 1 && !z.has_value()) {
    throw std::invalid_argument("reverse_step: noise draw is required for t > 1");
  }
  if (eps_hat.size() != tau_t.size() || (z && z->size() != tau_t.size())) {
    throw std::invalid_argument("reverse_step: length mismatch");
  }
  const double alpha = sched.alpha_at(t);
  const double gamma = sched.gamma_at(t);
  const double sigma = sched.sigma_at(t);
  const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
  const double eps_coef = (1.0 - alpha) / std::sqrt(1.0 - gamma);
  std::vector<Vec2> out;
  out.reserve(tau_t.size());
  for (std::size_t i = 0; i < tau_t.size(); ++i) {
    Vec2 p = {inv_sqrt_alpha * (tau_t[i].x - eps_coef * eps_hat[i].x),
              inv_sqrt_alpha * (tau_t[i].y - eps_coef * eps_hat[i].y)};
    if (z) {
      p.x += sigma * (*z)[i].x;
      p.y += sigma * (*z)[i].y;
    }
    out.push_back(p);
  }
  return out;
}

std::vector<std::vector<Vec2>> sample_trajectories(const Tensor& condition, int k,
                                                   const Denoiser& denoiser,
                                                   const NoiseSchedule& sched, double scale,
                                                   std::uint64_t seed, std::uint64_t item_id) {
  if (k < 1) throw std::invalid_argument("sample_trajectories: need k >= 1");
  const int horizon = denoiser.t_future();
  std::vector<std::vector<Vec2>> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int chain = 0; chain < k; ++chain) {
    Rng rng = Rng::derive(seed, item_id, static_cast<std::uint64_t>(chain), 0x5a11);
    std::vector<Vec2> tau(static_cast<std::size_t>(horizon));
    for (Vec2& p : tau) p = {rng.normal(), rng.normal()};
    for (int t = sched.steps; t >= 1; --t) {
      const Tensor eps_hat = denoiser.predict_noise(tau, t, condition, sched);
      std::vector<Vec2> eps(static_cast<std::size_t>(horizon));
      const auto data = eps_hat.data();
      for (int i = 0; i < horizon; ++i) {
        eps[static_cast<std::size_t>(i)] = {data[static_cast<std::size_t>(i)],
                                            data[static_cast<std::size_t>(horizon) + i]};
      }
      std::optional<std::vector<Vec2>> z;
      if (t > 1) {
        z.emplace(static_cast<std::size_t>(horizon));
        for (Vec2& p : *z) p = {rng.normal(), rng.normal()};
      }
      tau = reverse_step(tau, t, eps, sched, z);
    }
    out.push_back(denormalize_trajectory(tau, scale));
  }
  return out;
}

}  // namespace routediff
