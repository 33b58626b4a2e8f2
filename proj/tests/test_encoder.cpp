#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "routediff/encoder.hpp"

using namespace routediff;
using testutil::random_tensor;

namespace {

struct ConvStage {
  int stride;
  int kernel;
  int pad;
};

// Forward-propagates an index interval through a conv stack: the output
// indices that can see any input index in [lo, hi].
std::pair<int, int> propagate_interval(int lo, int hi, const std::vector<ConvStage>& stages,
                                       int out_size) {
  for (const ConvStage& st : stages) {
    const int new_lo = (lo + st.pad - st.kernel + 1 + st.stride - 1) / st.stride;  // ceil
    const int new_hi = (hi + st.pad) / st.stride;
    lo = std::max(0, new_lo);
    hi = new_hi;
  }
  return {lo, std::min(hi, out_size - 1)};
}

}  // namespace

TEST_CASE("all-zero input with zero-initialized weights propagates constants") {
  const ConditioningEncoder enc(128, 128);  // zero params until init
  const Tensor input = Tensor::zeros({5, 128, 128});
  const auto out = enc.encode(input);
  REQUIRE(out.seg_logits.shape() == Shape{1, 32, 32});
  REQUIRE(out.condition.shape() == Shape{64});
  for (double v : out.seg_logits.data()) CHECK(v == out.seg_logits.data()[0]);
  for (double v : out.condition.data()) CHECK(v == out.condition.data()[0]);
}

TEST_CASE("encode is deterministic and rejects shape mismatches") {
  ConditioningEncoder enc(128, 128);
  Rng rng(3);
  enc.init_params(rng);
  Rng data_rng(4);
  const Tensor input = random_tensor({5, 128, 128}, data_rng, 0.0, 1.0, false);
  const auto a = enc.encode(input);
  const auto b = enc.encode(input);
  for (std::size_t i = 0; i < a.seg_logits.numel(); ++i) {
    CHECK(a.seg_logits.data()[i] == b.seg_logits.data()[i]);
  }
  for (std::size_t i = 0; i < a.condition.numel(); ++i) {
    CHECK(a.condition.data()[i] == b.condition.data()[i]);
  }
  CHECK_THROWS_AS(enc.encode(Tensor::zeros({5, 64, 64})), std::invalid_argument);
}

TEST_CASE("condition length is identical across inputs under one config") {
  ConditioningEncoder enc(128, 128);
  Rng rng(5);
  enc.init_params(rng);
  Rng data_rng(6);
  for (int trial = 0; trial < 4; ++trial) {
    const Tensor input = random_tensor({5, 128, 128}, data_rng, 0.0, 1.0, false);
    CHECK(enc.encode(input).condition.numel() == 64);
  }
}

TEST_CASE("perturbing one input cell only changes logits inside its receptive field") {
  ConditioningEncoder enc(128, 128);
  Rng rng(7);
  enc.init_params(rng);
  Rng data_rng(8);
  Tensor input = random_tensor({5, 128, 128}, data_rng, 0.0, 1.0, false);
  const auto base = enc.encode(input);

  const std::vector<ConvStage> stage1 = {{2, 3, 1}, {2, 3, 1}, {1, 3, 1}, {1, 3, 1}};
  Rng cell_rng(9);
  for (int trial = 0; trial < 4; ++trial) {
    const int row = cell_rng.uniform_int(0, 127);
    const int col = cell_rng.uniform_int(0, 127);
    const int ch = cell_rng.uniform_int(0, 4);
    const std::size_t idx = (static_cast<std::size_t>(ch) * 128 + row) * 128 + col;
    Tensor perturbed = Tensor::from_data(
        {5, 128, 128}, {input.data().begin(), input.data().end()});
    perturbed.data_mut()[idx] += 0.75;
    const auto out = enc.encode(perturbed);

    const auto [row_lo, row_hi] = propagate_interval(row, row, stage1, 32);
    const auto [col_lo, col_hi] = propagate_interval(col, col, stage1, 32);
    bool any_change = false;
    for (int r = 0; r < 32; ++r) {
      for (int c = 0; c < 32; ++c) {
        const double delta =
            std::abs(out.seg_logits.data()[r * 32 + c] - base.seg_logits.data()[r * 32 + c]);
        if (r < row_lo || r > row_hi || c < col_lo || c > col_hi) {
          CHECK(delta == 0.0);
        } else if (delta > 0.0) {
          any_change = true;
        }
      }
    }
    CHECK(any_change);
  }
}

TEST_CASE("road_seg_loss") {
  SUBCASE("non-negative and matched saturated prediction is near zero") {
    const Tensor gt = Tensor::from_data({1, 2, 2}, {1.0, 0.0, 0.0, 1.0});
    const Tensor good = Tensor::from_data({1, 2, 2}, {30.0, -30.0, -30.0, 30.0});
    CHECK(road_seg_loss(good, gt).item() >= 0.0);
    CHECK(road_seg_loss(good, gt).item() < 4e-9);
  }
  SUBCASE("all-zero logits cost H*W*ln(2)") {
    const Tensor gt = Tensor::from_data({1, 2, 2}, {1.0, 0.0, 0.0, 1.0});
    CHECK(road_seg_loss(Tensor::zeros({1, 2, 2}), gt).item() ==
          doctest::Approx(4.0 * std::log(2.0)));
  }
  SUBCASE("gradient with respect to logits matches finite differences") {
    Rng rng(11);
    Tensor logits = random_tensor({1, 4, 4}, rng, -3.0, 3.0, true);
    std::vector<double> gt_data(16);
    for (double& v : gt_data) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
    const Tensor gt = Tensor::from_data({1, 4, 4}, gt_data);
    backward(road_seg_loss(logits, gt));
    std::vector<Tensor> params = {logits};
    const auto fd = testutil::finite_difference_grads(
        [&]() { return bce_with_logits_sum(logits, gt).item(); }, params);
    CHECK(testutil::max_grad_rel_error(params, fd) < 1e-4);
  }
  SUBCASE("counts as a supervision evaluation") {
    reset_seg_supervision_eval_count();
    const Tensor gt = Tensor::from_data({1, 1, 1}, {1.0});
    (void)road_seg_loss(Tensor::zeros({1, 1, 1}), gt);
    (void)road_seg_loss(Tensor::zeros({1, 1, 1}), gt);
    CHECK(seg_supervision_eval_count() == 2);
    reset_seg_supervision_eval_count();
  }
}

TEST_CASE("rasterize_gt_road_mask") {
  const GridSpec spec{};
  SUBCASE("straight future gives a vertical band in the coarse mask") {
    Polyline future;
    for (int i = 1; i <= 15; ++i) future.points.push_back({2.0 * i, 0.0});
    const Tensor mask = rasterize_gt_road_mask(future, spec, 3.0, 32, 32);
    REQUIRE(mask.shape() == Shape{1, 32, 32});
    // Ego column in coarse cells: col 64 / 4 = 16; rows ahead of ego.
    CHECK(mask.data()[10 * 32 + 16] == 1.0);
    CHECK(mask.data()[10 * 32 + 2] == 0.0);
    CHECK(mask.data()[10 * 32 + 30] == 0.0);
  }
  SUBCASE("random future equals the per-cell distance oracle pooled to coarse cells") {
    Rng rng(13);
    Polyline future;
    Vec2 p{2.0, 0.0};
    future.points.push_back(p);
    for (int i = 0; i < 9; ++i) {
      p = p + Vec2{rng.uniform(0.8, 2.2), rng.uniform(-1.2, 1.2)};
      future.points.push_back(p);
    }
    const double width = 2.4;
    const Tensor mask = rasterize_gt_road_mask(future, spec, width, 32, 32);
    for (int cr = 0; cr < 32; ++cr) {
      for (int cc = 0; cc < 32; ++cc) {
        double want = 0.0;
        for (int dr = 0; dr < 4 && want == 0.0; ++dr) {
          for (int dc = 0; dc < 4 && want == 0.0; ++dc) {
            const Vec2 center = cell_center({cr * 4 + dr, cc * 4 + dc}, spec);
            if (point_polyline_distance(center, future) <= width) want = 1.0;
          }
        }
        CHECK(mask.data()[cr * 32 + cc] == want);
      }
    }
  }
  SUBCASE("degenerate future is rejected") {
    Polyline future;
    future.points = {{1.0, 1.0}};
    CHECK_THROWS_AS(rasterize_gt_road_mask(future, spec, 3.0, 32, 32), std::invalid_argument);
  }
}
