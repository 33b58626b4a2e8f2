#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace routediff {

using Shape = std::vector<int>;

std::string shape_str(const Shape& s);
std::size_t shape_numel(const Shape& s);

namespace detail {

struct TensorNode {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // allocated lazily, same length as data
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void()> backward;  // accumulates into parents' grads

  std::size_t numel() const { return data.size(); }
  void ensure_grad();
};

}  // namespace detail

// Dense float64 tensor with define-by-run reverse-mode autodiff. A Tensor is
// a cheap handle onto a graph node; ops record the backward closure on the
// result node. The graph lives as long as some handle reaches it.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<double> data,
                          bool requires_grad = false);
  static Tensor scalar(double value);

  bool valid() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t numel() const;
  bool requires_grad() const;

  std::span<const double> data() const;
  std::span<double> data_mut();  // for parameter updates; not graph-tracked
  std::span<const double> grad() const;
  bool has_grad() const;
  void zero_grad();

  double item() const;  // scalar tensors only

  const std::shared_ptr<detail::TensorNode>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::TensorNode> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::TensorNode> node_;
};

// Elementwise; shapes must match exactly.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// out = x * k
Tensor scale(const Tensor& x, double k);
// x: (C, ...) plus bias (C) broadcast over the trailing dimensions.
Tensor add_channel_bias(const Tensor& x, const Tensor& bias);

// a: (m, k), b: (k, n) -> (m, n)
Tensor matmul(const Tensor& a, const Tensor& b);

// x: (Cin, H, W), w: (Cout, Cin, kh, kw), bias (Cout) optional (pass invalid
// Tensor to skip). Zero padding, stride 1 or 2.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int stride, int pad);
// x: (Cin, L), w: (Cout, Cin, k), bias (Cout) optional.
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, int stride, int pad);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

Tensor sum(const Tensor& x);   // -> scalar
Tensor mean(const Tensor& x);  // -> scalar

Tensor reshape(const Tensor& x, Shape shape);
// Concatenates along axis 0; trailing dimensions must match.
Tensor concat(const std::vector<Tensor>& xs);
// x: (C, L) -> (C, L * factor), nearest-neighbor repeat.
Tensor upsample_nearest1d(const Tensor& x, int factor);
// Sub-pixel upsampling: x (2C, L) -> (C, 2L) with out[c][2l + r] = x[2c + r][l].
// Gives the two output phases independent channels, unlike nearest repeat.
Tensor pixel_shuffle1d(const Tensor& x);
// x: (C, L) -> (C, len), keeps the prefix.
Tensor crop1d(const Tensor& x, int len);

// Numerically stable sum_i [max(l,0) - l*y + log(1+exp(-|l|))] with
// d/dl = sigmoid(l) - y. Targets must be exactly 0 or 1 and carry no grad.
Tensor bce_with_logits_sum(const Tensor& logits, const Tensor& targets);

// Reverse pass from a scalar loss; accumulates into .grad of every reachable
// tensor that requires grad. Rejects non-scalar inputs.
void backward(const Tensor& loss);

}  // namespace routediff
