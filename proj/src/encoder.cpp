#include "routediff/encoder.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace routediff {

namespace {

std::atomic<std::uint64_t> g_seg_supervision_evals{0};

Tensor xavier_conv2d(int cout, int cin, int k, Rng& rng) {
  const double bound = std::sqrt(6.0 / (static_cast<double>(cin) * k * k + static_cast<double>(cout) * k * k));
  std::vector<double> w(static_cast<std::size_t>(cout) * cin * k * k);
  for (double& v : w) v = rng.uniform(-bound, bound);
  return Tensor::from_data({cout, cin, k, k}, std::move(w), true);
}

}  // namespace

ConditioningEncoder::ConditioningEncoder(int grid_h, int grid_w)
    : grid_h_(grid_h), grid_w_(grid_w) {
  if (grid_h <= 0 || grid_w <= 0 || grid_h % 16 != 0 || grid_w % 16 != 0) {
    throw std::invalid_argument("ConditioningEncoder: grid dimensions must be positive multiples of 16");
  }
  w1_ = Tensor::zeros({16, 5, 3, 3}, true);
  b1_ = Tensor::zeros({16}, true);
  w2_ = Tensor::zeros({32, 16, 3, 3}, true);
  b2_ = Tensor::zeros({32}, true);
  w3_ = Tensor::zeros({32, 32, 3, 3}, true);
  b3_ = Tensor::zeros({32}, true);
  w4_ = Tensor::zeros({1, 32, 3, 3}, true);
  b4_ = Tensor::zeros({1}, true);
  v1_ = Tensor::zeros({8, 1, 5, 5}, true);
  c1_ = Tensor::zeros({8}, true);
  v2_ = Tensor::zeros({16, 8, 5, 5}, true);
  c2_ = Tensor::zeros({16}, true);
  v3_ = Tensor::zeros({1, 16, 3, 3}, true);
  c3_ = Tensor::zeros({1}, true);
}

void ConditioningEncoder::init_params(Rng& rng) {
  w1_ = xavier_conv2d(16, 5, 3, rng);
  w2_ = xavier_conv2d(32, 16, 3, rng);
  w3_ = xavier_conv2d(32, 32, 3, rng);
  w4_ = xavier_conv2d(1, 32, 3, rng);
  v1_ = xavier_conv2d(8, 1, 5, rng);
  v2_ = xavier_conv2d(16, 8, 5, rng);
  v3_ = xavier_conv2d(1, 16, 3, rng);
}

std::vector<NamedParam> ConditioningEncoder::named_params(const std::string& prefix) const {
  return {
      {prefix + ".stage1.conv1.w", w1_}, {prefix + ".stage1.conv1.b", b1_},
      {prefix + ".stage1.conv2.w", w2_}, {prefix + ".stage1.conv2.b", b2_},
      {prefix + ".stage1.conv3.w", w3_}, {prefix + ".stage1.conv3.b", b3_},
      {prefix + ".stage1.seg_head.w", w4_}, {prefix + ".stage1.seg_head.b", b4_},
      {prefix + ".stage2.conv1.w", v1_}, {prefix + ".stage2.conv1.b", c1_},
      {prefix + ".stage2.conv2.w", v2_}, {prefix + ".stage2.conv2.b", c2_},
      {prefix + ".stage2.conv3.w", v3_}, {prefix + ".stage2.conv3.b", c3_},
  };
}

ConditioningEncoder::Output ConditioningEncoder::encode(const Tensor& input) const {
  if (input.shape() != Shape{5, grid_h_, grid_w_}) {
    throw std::invalid_argument("encode: input shape " + shape_str(input.shape()) +
                                " does not match expected " +
                                shape_str({5, grid_h_, grid_w_}));
  }
  const Tensor h1 = relu(conv2d(input, w1_, b1_, 2, 1));  // (16, H/2, W/2)
  const Tensor h2 = relu(conv2d(h1, w2_, b2_, 2, 1));     // (32, H/4, W/4)
  const Tensor h3 = relu(conv2d(h2, w3_, b3_, 1, 1));     // (32, H/4, W/4)
  const Tensor logits = conv2d(h3, w4_, b4_, 1, 1);       // (1, H/4, W/4)

  const Tensor mask = sigmoid(logits);
  const Tensor g1 = relu(conv2d(mask, v1_, c1_, 2, 2));  // (8, H/8, W/8)
  const Tensor g2 = relu(conv2d(g1, v2_, c2_, 2, 2));    // (16, H/16, W/16)
  const Tensor g3 = conv2d(g2, v3_, c3_, 1, 1);          // (1, H/16, W/16)
  return {logits, reshape(g3, {condition_size()})};
}

Tensor road_seg_loss(const Tensor& seg_logits, const Tensor& gt_mask) {
  g_seg_supervision_evals.fetch_add(1, std::memory_order_relaxed);
  return bce_with_logits_sum(seg_logits, gt_mask);
}

Tensor rasterize_gt_road_mask(const Polyline& future, const GridSpec& spec, double width,
                              int out_h, int out_w) {
  validate_polyline(future);
  if (out_h <= 0 || out_w <= 0 || spec.height_cells % out_h != 0 ||
      spec.width_cells % out_w != 0 ||
      spec.height_cells / out_h != spec.width_cells / out_w) {
    throw std::invalid_argument("rasterize_gt_road_mask: grid does not pool evenly to " +
                                std::to_string(out_h) + "x" + std::to_string(out_w));
  }
  const BevGrid full = rasterize_route(future, spec, width);
  const int pool = spec.height_cells / out_h;
  std::vector<double> mask(static_cast<std::size_t>(out_h) * out_w, 0.0);
  for (int r = 0; r < spec.height_cells; ++r) {
    for (int c = 0; c < spec.width_cells; ++c) {
      if (full.at(0, r, c) != 0.0) {
        mask[static_cast<std::size_t>(r / pool) * out_w + c / pool] = 1.0;
      }
    }
  }
  return Tensor::from_data({1, out_h, out_w}, std::move(mask));
}

std::uint64_t seg_supervision_eval_count() {
  return g_seg_supervision_evals.load(std::memory_order_relaxed);
}

void reset_seg_supervision_eval_count() {
  g_seg_supervision_evals.store(0, std::memory_order_relaxed);
}

}  // namespace routediff
