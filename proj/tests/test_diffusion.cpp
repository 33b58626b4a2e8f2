#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "routediff/diffusion.hpp"
#include "routediff/scenario.hpp"

using namespace routediff;
using testutil::random_tensor;

namespace {

std::vector<Vec2> random_trajectory(Rng& rng, int n, double span) {
  std::vector<Vec2> pts(static_cast<std::size_t>(n));
  for (Vec2& p : pts) p = {rng.uniform(-span, span), rng.uniform(-span, span)};
  return pts;
}

// Closed-form oracle for the cosine schedule, written independently of the
// builder: alphas from the f-ratio with the same 0.001 clip.
std::vector<double> cosine_gamma_oracle(int steps) {
  const double s = 0.008;
  const auto f = [&](double t) {
    const double c = std::cos((t / steps + s) / (1.0 + s) * std::numbers::pi / 2.0);
    return c * c;
  };
  std::vector<double> gamma;
  double g = 1.0;
  for (int t = 1; t <= steps; ++t) {
    g *= std::max(f(t) / f(t - 1.0), 0.001);
    gamma.push_back(g);
  }
  return gamma;
}

}  // namespace

TEST_CASE("build_schedule") {
  SUBCASE("gamma strictly decreasing with gamma_1 < 1, alphas in (0,1), both kinds") {
    for (ScheduleKind kind : {ScheduleKind::kCosine, ScheduleKind::kLinear}) {
      const NoiseSchedule sched = build_schedule(10, kind);
      CHECK(sched.gamma_at(1) < 1.0);
      for (int t = 1; t <= 10; ++t) {
        CHECK(sched.gamma_at(t) > 0.0);
        CHECK(sched.gamma_at(t) < sched.gamma_at(t - 1));
        CHECK(sched.alpha_at(t) > 0.0);
        CHECK(sched.alpha_at(t) < 1.0);
      }
    }
  }
  SUBCASE("T = 1 gives a single gamma in (0, 1)") {
    for (ScheduleKind kind : {ScheduleKind::kCosine, ScheduleKind::kLinear}) {
      const NoiseSchedule sched = build_schedule(1, kind);
      CHECK(sched.gamma.size() == 1);
      CHECK(sched.gamma[0] > 0.0);
      CHECK(sched.gamma[0] < 1.0);
      CHECK(sched.sigma_at(1) == 0.0);
    }
  }
  SUBCASE("T = 10 cosine matches the closed-form oracle within 1e-12") {
    const NoiseSchedule sched = build_schedule(10, ScheduleKind::kCosine);
    const std::vector<double> oracle = cosine_gamma_oracle(10);
    for (int t = 1; t <= 10; ++t) {
      CHECK(sched.gamma_at(t) == doctest::Approx(oracle[t - 1]).epsilon(1e-12));
    }
    CHECK(sched.gamma_at(10) < 0.05);
  }
  SUBCASE("T < 1 is rejected") { CHECK_THROWS_AS(build_schedule(0, ScheduleKind::kCosine), std::invalid_argument); }
}

TEST_CASE("normalize / denormalize") {
  SUBCASE("zero maps to zero and the scale point maps to one") {
    const std::vector<Vec2> z = {{0.0, 0.0}};
    CHECK(normalize_trajectory(z, 32.0)[0].x == 0.0);
    const std::vector<Vec2> p = {{32.0, 0.0}};
    CHECK(normalize_trajectory(p, 32.0)[0].x == 1.0);
    CHECK(normalize_trajectory(p, 32.0)[0].y == 0.0);
  }
  SUBCASE("round trip is bit-exact on 1000 random trajectories") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
      const std::vector<Vec2> tau = random_trajectory(rng, 15, 40.0);
      const std::vector<Vec2> back = denormalize_trajectory(normalize_trajectory(tau, 32.0), 32.0);
      for (std::size_t j = 0; j < tau.size(); ++j) {
        CHECK(back[j].x == tau[j].x);
        CHECK(back[j].y == tau[j].y);
      }
    }
  }
  SUBCASE("default-generator ground truth normalizes into [-1.2, 1.2]") {
    const GenParams params;
    Rng seed_rng(5);
    for (ScenarioKind kind : kAllScenarioKinds) {
      for (int trial = 0; trial < 10; ++trial) {
        const ScenarioSample s = generate_scenario(kind, seed_rng.next_u64(), params);
        for (Vec2 p : normalize_trajectory(s.future.points, 32.0)) {
          CHECK(std::abs(p.x) <= 1.2);
          CHECK(std::abs(p.y) <= 1.2);
        }
      }
    }
  }
}

TEST_CASE("forward_diffuse") {
  const NoiseSchedule sched = build_schedule(10, ScheduleKind::kCosine);
  Rng rng(7);
  const std::vector<Vec2> tau0 = random_trajectory(rng, 15, 1.0);
  std::vector<Vec2> eps(15);
  for (Vec2& e : eps) e = {rng.normal(), rng.normal()};

  SUBCASE("hypothetical gamma = 1 returns tau0 unchanged") {
    NoiseSchedule degenerate;
    degenerate.steps = 1;
    degenerate.gamma = {1.0};
    degenerate.alpha = {1.0};
    degenerate.sigma = {0.0};
    const auto out = forward_diffuse(tau0, 1, eps, degenerate);
    for (std::size_t i = 0; i < tau0.size(); ++i) {
      CHECK(out[i].x == tau0[i].x);
      CHECK(out[i].y == tau0[i].y);
    }
  }
  SUBCASE("zero tau0 leaves the pure noise branch") {
    const std::vector<Vec2> zeros(15, Vec2{0.0, 0.0});
    const int t = 4;
    const auto out = forward_diffuse(zeros, t, eps, sched);
    const double coef = std::sqrt(1.0 - sched.gamma_at(t));
    for (std::size_t i = 0; i < eps.size(); ++i) {
      CHECK(out[i].x == doctest::Approx(coef * eps[i].x).epsilon(1e-15));
      CHECK(out[i].y == doctest::Approx(coef * eps[i].y).epsilon(1e-15));
    }
  }
  SUBCASE("step out of range is rejected") {
    CHECK_THROWS_AS(forward_diffuse(tau0, 0, eps, sched), std::invalid_argument);
    CHECK_THROWS_AS(forward_diffuse(tau0, 11, eps, sched), std::invalid_argument);
  }
  SUBCASE("empirical moments over 1e4 draws match the closed form within 2%") {
    Rng mc(11);
    for (int t = 1; t <= 10; ++t) {
      const double g = sched.gamma_at(t);
      const double sd = std::sqrt(1.0 - g);
      const int n = 10000;
      std::vector<double> mean(30, 0.0), sq(30, 0.0);
      for (int draw = 0; draw < n; ++draw) {
        std::vector<Vec2> e(15);
        for (Vec2& v : e) v = {mc.normal(), mc.normal()};
        const auto out = forward_diffuse(tau0, t, e, sched);
        for (int i = 0; i < 15; ++i) {
          mean[2 * i] += out[i].x;
          mean[2 * i + 1] += out[i].y;
          sq[2 * i] += out[i].x * out[i].x;
          sq[2 * i + 1] += out[i].y * out[i].y;
        }
      }
      double mean_rms = 0.0;
      double var_mean = 0.0;
      for (int i = 0; i < 30; ++i) {
        mean[i] /= n;
        const double expected =
            std::sqrt(g) * (i % 2 == 0 ? tau0[i / 2].x : tau0[i / 2].y);
        const double z = (mean[i] - expected) / sd;  // estimator scale
        mean_rms += z * z;
        var_mean += sq[i] / n - mean[i] * mean[i];
      }
      mean_rms = std::sqrt(mean_rms / 30.0);
      var_mean /= 30.0;
      CHECK(mean_rms < 0.02);
      CHECK(std::abs(var_mean - (1.0 - g)) / (1.0 - g) < 0.02);
    }
  }
}

TEST_CASE("timestep_embedding") {
  SUBCASE("components stay in [-1, 1] and t = 0 alternates (0, 1)") {
    const auto emb = timestep_embedding(0, 8);
    for (int j = 0; j < 4; ++j) {
      CHECK(emb[2 * j] == 0.0);
      CHECK(emb[2 * j + 1] == 1.0);
    }
    for (int t = 1; t <= 20; ++t) {
      for (double v : timestep_embedding(t, 32)) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
      }
    }
  }
  SUBCASE("distinct steps give pairwise distinct vectors") {
    std::vector<std::vector<double>> embs;
    for (int t = 1; t <= 10; ++t) embs.push_back(timestep_embedding(t, 32));
    for (std::size_t a = 0; a < embs.size(); ++a) {
      for (std::size_t b = a + 1; b < embs.size(); ++b) {
        double gap = 0.0;
        for (std::size_t i = 0; i < embs[a].size(); ++i) {
          gap += (embs[a][i] - embs[b][i]) * (embs[a][i] - embs[b][i]);
        }
        CHECK(std::sqrt(gap) > 1e-6);
      }
    }
  }
  SUBCASE("odd dimension is rejected") {
    CHECK_THROWS_AS(timestep_embedding(1, 7), std::invalid_argument);
  }
}

TEST_CASE("predict_noise") {
  const NoiseSchedule sched = build_schedule(10, ScheduleKind::kCosine);
  SUBCASE("zero-initialized parameters output exactly zero") {
    const Denoiser dn(15, 32, 64);
    Rng rng(13);
    const std::vector<Vec2> tau = random_trajectory(rng, 15, 1.0);
    const Tensor c = random_tensor({64}, rng, -1.0, 1.0, false);
    const Tensor out = dn.predict_noise(tau, 3, c, sched);
    REQUIRE(out.shape() == Shape{2, 15});
    for (double v : out.data()) CHECK(v == 0.0);
  }
  SUBCASE("deterministic for identical inputs") {
    Denoiser dn(15, 32, 64);
    Rng rng(17);
    dn.init_params(rng);
    Rng data_rng(19);
    const std::vector<Vec2> tau = random_trajectory(data_rng, 15, 1.0);
    const Tensor c = random_tensor({64}, data_rng, -1.0, 1.0, false);
    const Tensor a = dn.predict_noise(tau, 7, c, sched);
    const Tensor b = dn.predict_noise(tau, 7, c, sched);
    for (std::size_t i = 0; i < a.numel(); ++i) CHECK(a.data()[i] == b.data()[i]);
  }
  SUBCASE("parameter gradients match finite differences") {
    Denoiser dn(8, 4, 6);
    Rng rng(23);
    dn.init_params(rng);
    Rng data_rng(29);
    const std::vector<Vec2> tau = random_trajectory(data_rng, 8, 1.0);
    const Tensor c = random_tensor({6}, data_rng, -1.0, 1.0, false);
    const NoiseSchedule small = build_schedule(5, ScheduleKind::kCosine);

    std::vector<Tensor> params;
    for (const NamedParam& p : dn.named_params("dn")) params.push_back(p.tensor);
    const auto forward = [&]() {
      const Tensor out = dn.predict_noise(tau, 2, c, small);
      return mean(mul(out, out));
    };
    backward(forward());
    const auto fd =
        testutil::finite_difference_grads([&]() { return forward().item(); }, params);
    CHECK(testutil::max_grad_rel_error(params, fd) < 1e-4);
  }
  SUBCASE("shape mismatches are rejected") {
    const Denoiser dn(15, 32, 64);
    Rng rng(31);
    const std::vector<Vec2> short_tau = random_trajectory(rng, 8, 1.0);
    const Tensor c = random_tensor({64}, rng, -1.0, 1.0, false);
    CHECK_THROWS_AS(dn.predict_noise(short_tau, 3, c, sched), std::invalid_argument);
    const std::vector<Vec2> tau = random_trajectory(rng, 15, 1.0);
    const Tensor bad_c = random_tensor({32}, rng, -1.0, 1.0, false);
    CHECK_THROWS_AS(dn.predict_noise(tau, 3, bad_c, sched), std::invalid_argument);
  }
}

TEST_CASE("diffusion_loss") {
  const NoiseSchedule sched = build_schedule(10, ScheduleKind::kCosine);
  Rng rng(37);
  const Tensor c = Tensor::zeros({64});
  std::vector<DiffusionExample> batch;
  for (int i = 0; i < 8; ++i) batch.push_back({random_trajectory(rng, 15, 0.9), c});

  SUBCASE("a perfect oracle gives exactly zero") {
    // The oracle reconstructs the injected noise from tau_t and the known tau0.
    std::size_t call = 0;
    const NoisePredictor perfect = [&](const std::vector<Vec2>& tau_t, int t,
                                       const Tensor&) -> Tensor {
      const std::vector<Vec2>& tau0 = batch[call++ % batch.size()].tau0_normalized;
      const double g = sched.gamma_at(t);
      std::vector<double> eps(30);
      for (int i = 0; i < 15; ++i) {
        eps[i] = (tau_t[i].x - std::sqrt(g) * tau0[i].x) / std::sqrt(1.0 - g);
        eps[15 + i] = (tau_t[i].y - std::sqrt(g) * tau0[i].y) / std::sqrt(1.0 - g);
      }
      return Tensor::from_data({2, 15}, std::move(eps));
    };
    Rng loss_rng(41);
    CHECK(diffusion_loss_with(batch, loss_rng, sched, perfect).item() ==
          doctest::Approx(0.0).epsilon(1e-24));
  }
  SUBCASE("zero denoiser loses about 1.0 over many Monte Carlo samples") {
    const Denoiser zero_dn(15, 32, 64);
    Rng loss_rng(43);
    double acc = 0.0;
    const int batches = 1250;  // 1e4 samples in batches of 8
    for (int i = 0; i < batches; ++i) {
      acc += diffusion_loss(batch, loss_rng, sched, zero_dn).item();
    }
    CHECK(acc / batches == doctest::Approx(1.0).epsilon(0.05));
  }
  SUBCASE("reproducible bit-exactly under a fixed seed") {
    const Denoiser zero_dn(15, 32, 64);
    Rng a(47), b(47);
    CHECK(diffusion_loss(batch, a, sched, zero_dn).item() ==
          diffusion_loss(batch, b, sched, zero_dn).item());
  }
  SUBCASE("empty batch is rejected") {
    Rng loss_rng(53);
    const Denoiser dn(15, 32, 64);
    CHECK_THROWS_AS(diffusion_loss({}, loss_rng, sched, dn), std::invalid_argument);
  }
}

TEST_CASE("total_loss") {
  const Tensor diffusion = Tensor::scalar(0.75);
  const Tensor road = Tensor::scalar(12.5);
  SUBCASE("lambda 0 equals the diffusion term exactly") {
    CHECK(total_loss(diffusion, road, 0.0).item() == 0.75);
  }
  SUBCASE("lambda 1 sums the parts") {
    CHECK(total_loss(diffusion, road, 1.0).item() == doctest::Approx(13.25).epsilon(1e-12));
  }
  SUBCASE("doubling lambda doubles the road contribution") {
    const double l1 = total_loss(diffusion, road, 0.1).item();
    const double l2 = total_loss(diffusion, road, 0.2).item();
    CHECK(l2 - l1 == doctest::Approx(0.1 * 12.5).epsilon(1e-12));
  }
  SUBCASE("negative lambda is rejected") {
    CHECK_THROWS_AS(total_loss(diffusion, road, -0.1), std::invalid_argument);
  }
}

TEST_CASE("reverse_step") {
  const NoiseSchedule sched = build_schedule(10, ScheduleKind::kCosine);
  Rng rng(59);

  SUBCASE("single-step schedule inverts the forward process within 1e-9") {
    const NoiseSchedule one = build_schedule(1, ScheduleKind::kCosine);
    const std::vector<Vec2> tau0 = random_trajectory(rng, 15, 0.9);
    std::vector<Vec2> eps(15);
    for (Vec2& e : eps) e = {rng.normal(), rng.normal()};
    const auto tau1 = forward_diffuse(tau0, 1, eps, one);
    const auto back = reverse_step(tau1, 1, eps, one, std::nullopt);
    for (std::size_t i = 0; i < tau0.size(); ++i) {
      CHECK(back[i].x == doctest::Approx(tau0[i].x).epsilon(1e-9));
      CHECK(back[i].y == doctest::Approx(tau0[i].y).epsilon(1e-9));
    }
  }
  SUBCASE("zero prediction and zero noise reduce to scaling by 1/sqrt(alpha)") {
    const std::vector<Vec2> tau = random_trajectory(rng, 15, 1.0);
    const std::vector<Vec2> zero(15, Vec2{0.0, 0.0});
    const int t = 5;
    const auto out = reverse_step(tau, t, zero, sched, zero);
    const double inv = 1.0 / std::sqrt(sched.alpha_at(t));
    for (std::size_t i = 0; i < tau.size(); ++i) {
      CHECK(out[i].x == doctest::Approx(tau[i].x * inv).epsilon(1e-15));
    }
  }
  SUBCASE("noise draw contract: required above t = 1, forbidden at t = 1") {
    const std::vector<Vec2> tau = random_trajectory(rng, 15, 1.0);
    const std::vector<Vec2> zero(15, Vec2{0.0, 0.0});
    CHECK_THROWS_AS(reverse_step(tau, 5, zero, sched, std::nullopt), std::invalid_argument);
    CHECK_THROWS_AS(reverse_step(tau, 1, zero, sched, zero), std::invalid_argument);
    CHECK_THROWS_AS(reverse_step(tau, 0, zero, sched, zero), std::invalid_argument);
  }
  SUBCASE("full chain with the true-noise oracle reconstructs tau0 within 1e-6") {
    for (int trial = 0; trial < 100; ++trial) {
      const std::vector<Vec2> tau0 = random_trajectory(rng, 15, 0.9);
      std::vector<Vec2> tau(15);
      for (Vec2& p : tau) p = {rng.normal(), rng.normal()};  // arbitrary start
      const std::vector<Vec2> zero(15, Vec2{0.0, 0.0});
      for (int t = sched.steps; t >= 1; --t) {
        const double g = sched.gamma_at(t);
        std::vector<Vec2> eps(15);
        for (int i = 0; i < 15; ++i) {
          eps[static_cast<std::size_t>(i)] = {
              (tau[static_cast<std::size_t>(i)].x - std::sqrt(g) * tau0[static_cast<std::size_t>(i)].x) / std::sqrt(1.0 - g),
              (tau[static_cast<std::size_t>(i)].y - std::sqrt(g) * tau0[static_cast<std::size_t>(i)].y) / std::sqrt(1.0 - g)};
        }
        tau = reverse_step(tau, t, eps, sched,
                           t > 1 ? std::optional<std::vector<Vec2>>(zero) : std::nullopt);
      }
      for (std::size_t i = 0; i < tau0.size(); ++i) {
        CHECK(std::abs(tau[i].x - tau0[i].x) < 1e-6);
        CHECK(std::abs(tau[i].y - tau0[i].y) < 1e-6);
      }
    }
  }
}

TEST_CASE("sample_trajectories") {
  const NoiseSchedule sched = build_schedule(10, ScheduleKind::kCosine);
  Denoiser dn(15, 32, 64);
  Rng rng(61);
  dn.init_params(rng);
  const Tensor c = random_tensor({64}, rng, -0.5, 0.5, false);

  SUBCASE("same seed gives a bit-identical sample set") {
    const auto a = sample_trajectories(c, 3, dn, sched, 32.0, 99, 5);
    const auto b = sample_trajectories(c, 3, dn, sched, 32.0, 99, 5);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      for (std::size_t i = 0; i < a[k].size(); ++i) {
        CHECK(a[k][i].x == b[k][i].x);
        CHECK(a[k][i].y == b[k][i].y);
      }
    }
  }
  SUBCASE("chains use independent streams, so candidates differ") {
    const auto set = sample_trajectories(c, 2, dn, sched, 32.0, 99, 5);
    double gap = 0.0;
    for (std::size_t i = 0; i < set[0].size(); ++i) {
      gap += distance(set[0][i], set[1][i]);
    }
    CHECK(gap > 0.0);
  }
  SUBCASE("k-sample prefixes are nested") {
    const auto k5 = sample_trajectories(c, 5, dn, sched, 32.0, 99, 5);
    const auto k2 = sample_trajectories(c, 2, dn, sched, 32.0, 99, 5);
    for (std::size_t k = 0; k < 2; ++k) {
      for (std::size_t i = 0; i < k2[k].size(); ++i) {
        CHECK(k5[k][i].x == k2[k][i].x);
        CHECK(k5[k][i].y == k2[k][i].y);
      }
    }
  }
  SUBCASE("k < 1 is rejected") {
    CHECK_THROWS_AS(sample_trajectories(c, 0, dn, sched, 32.0, 99, 5), std::invalid_argument);
  }
}
