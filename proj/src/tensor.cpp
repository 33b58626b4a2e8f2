#include "routediff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace routediff {

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ", ";
    os << s[i];
  }
  os << ')';
  return os.str();
}

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (int d : s) {
    if (d <= 0) throw std::invalid_argument("non-positive dimension in shape " + shape_str(s));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

namespace detail {

void TensorNode::ensure_grad() {
  if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

}  // namespace detail

using detail::TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

namespace {

NodePtr new_node(Shape shape, std::vector<double> data, bool requires_grad) {
  auto n = std::make_shared<TensorNode>();
  n->shape = std::move(shape);
  n->data = std::move(data);
  n->requires_grad = requires_grad;
  return n;
}

const NodePtr& node_of(const Tensor& t, const char* op) {
  if (!t.valid()) throw std::invalid_argument(std::string(op) + ": empty tensor operand");
  return t.node();
}

void require_finite(const Tensor& t, const char* op) {
  for (double v : t.data()) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(op) + ": non-finite value in input of shape " +
                                  shape_str(t.shape()));
    }
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
  }
}

int floordiv(int a, int b) {
  int q = a / b;
  if (a % b != 0 && (a < 0) != (b < 0)) --q;
  return q;
}

int ceildiv(int a, int b) { return -floordiv(-a, b); }

int conv_out_size(int in, int k, int stride, int pad) {
  return floordiv(in + 2 * pad - k, stride) + 1;
}

void check_conv_args(int stride, int pad, const char* op) {
  if (stride != 1 && stride != 2) {
    throw std::invalid_argument(std::string(op) + ": stride must be 1 or 2, got " +
                                std::to_string(stride));
  }
  if (pad < 0) throw std::invalid_argument(std::string(op) + ": negative padding");
}

}  // namespace

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return Tensor(new_node(std::move(shape), std::vector<double>(n, 0.0), requires_grad));
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape_numel(shape) != data.size()) {
    throw std::invalid_argument("from_data: shape " + shape_str(shape) + " wants " +
                                std::to_string(shape_numel(shape)) + " values, got " +
                                std::to_string(data.size()));
  }
  return Tensor(new_node(std::move(shape), std::move(data), requires_grad));
}

Tensor Tensor::scalar(double value) { return from_data({1}, {value}); }

const Shape& Tensor::shape() const { return node_of(*this, "shape")->shape; }
std::size_t Tensor::numel() const { return node_of(*this, "numel")->numel(); }
bool Tensor::requires_grad() const { return node_of(*this, "requires_grad")->requires_grad; }

std::span<const double> Tensor::data() const {
  const auto& n = node_of(*this, "data");
  return {n->data.data(), n->data.size()};
}

std::span<double> Tensor::data_mut() {
  const auto& n = node_of(*this, "data_mut");
  return {n->data.data(), n->data.size()};
}

std::span<const double> Tensor::grad() const {
  const auto& n = node_of(*this, "grad");
  if (n->grad.size() != n->data.size()) {
    throw std::logic_error("grad requested before backward pass");
  }
  return {n->grad.data(), n->grad.size()};
}

bool Tensor::has_grad() const { return node_of(*this, "has_grad")->grad.size() == numel(); }

void Tensor::zero_grad() {
  const auto& n = node_of(*this, "zero_grad");
  std::fill(n->grad.begin(), n->grad.end(), 0.0);
}

double Tensor::item() const {
  const auto& n = node_of(*this, "item");
  if (n->numel() != 1) {
    throw std::invalid_argument("item: tensor of shape " + shape_str(n->shape) + " is not scalar");
  }
  return n->data[0];
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  require_finite(a, "add");
  require_finite(b, "add");
  const auto& na = a.node();
  const auto& nb = b.node();
  std::vector<double> out(na->numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = na->data[i] + nb->data[i];
  const bool rg = na->requires_grad || nb->requires_grad;
  auto n = new_node(na->shape, std::move(out), rg);
  if (rg) {
    n->parents = {na, nb};
    TensorNode* raw = n.get();
    n->backward = [raw, na, nb]() {
      if (na->requires_grad) {
        na->ensure_grad();
        for (std::size_t i = 0; i < raw->grad.size(); ++i) na->grad[i] += raw->grad[i];
      }
      if (nb->requires_grad) {
        nb->ensure_grad();
        for (std::size_t i = 0; i < raw->grad.size(); ++i) nb->grad[i] += raw->grad[i];
      }
    };
  }
  return Tensor(n);
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  require_finite(a, "sub");
  require_finite(b, "sub");
  const auto& na = a.node();
  const auto& nb = b.node();
  std::vector<double> out(na->numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = na->data[i] - nb->data[i];
  const bool rg = na->requires_grad || nb->requires_grad;
  auto n = new_node(na->shape, std::move(out), rg);
  if (rg) {
    n->parents = {na, nb};
    TensorNode* raw = n.get();
    n->backward = [raw, na, nb]() {
      if (na->requires_grad) {
        na->ensure_grad();
        for (std::size_t i = 0; i < raw->grad.size(); ++i) na->grad[i] += raw->grad[i];
      }
      if (nb->requires_grad) {
        nb->ensure_grad();
        for (std::size_t i = 0; i < raw->grad.size(); ++i) nb->grad[i] -= raw->grad[i];
      }
    };
  }
  return Tensor(n);
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  require_finite(a, "mul");
  require_finite(b, "mul");
  const auto& na = a.node();
  const auto& nb = b.node();
  std::vector<double> out(na->numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = na->data[i] * nb->data[i];
  const bool rg = na->requires_grad || nb->requires_grad;
  auto n = new_node(na->shape, std::move(out), rg);
  if (rg) {
    n->parents = {na, nb};
    TensorNode* raw = n.get();
    n->backward = [raw, na, nb]() {
      if (na->requires_grad) {
        na->ensure_grad();
        for (std::size_t i = 0; i < raw->grad.size(); ++i)
          na->grad[i] += raw->grad[i] * nb->data[i];
      }
      if (nb->requires_grad) {
        nb->ensure_grad();
        for (std::size_t i = 0; i < raw->grad.size(); ++i)
          nb->grad[i] += raw->grad[i] * na->data[i];
      }
    };
  }
  return Tensor(n);
}

Tensor scale(const Tensor& x, double k) {
  require_finite(x, "scale");
  if (!std::isfinite(k)) throw std::invalid_argument("scale: non-finite factor");
  const auto& nx = x.node();
  std::vector<double> out(nx->numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = nx->data[i] * k;
  auto n = new_node(nx->shape, std::move(out), nx->requires_grad);
  if (n->requires_grad) {
    n->parents = {nx};
    TensorNode* raw = n.get();
    n->backward = [raw, nx, k]() {
      nx->ensure_grad();
      for (std::size_t i = 0; i < raw->grad.size(); ++i) nx->grad[i] += raw->grad[i] * k;
    };
  }
  return Tensor(n);
}

Tensor add_channel_bias(const Tensor& x, const Tensor& bias) {
  require_finite(x, "add_channel_bias");
  require_finite(bias, "add_channel_bias");
  const auto& nx = x.node();
  const auto& nb = bias.node();
  if (nx->shape.empty() || nb->shape.size() != 1 || nb->shape[0] != nx->shape[0]) {
    throw std::invalid_argument("add_channel_bias: shape mismatch " + shape_str(nx->shape) +
                                " vs bias " + shape_str(nb->shape));
  }
  const std::size_t channels = static_cast<std::size_t>(nx->shape[0]);
  const std::size_t inner = nx->numel() / channels;
  std::vector<double> out(nx->numel());
  for (std::size_t c = 0; c < channels; ++c) {
    const double bv = nb->data[c];
    for (std::size_t i = 0; i < inner; ++i) out[c * inner + i] = nx->data[c * inner + i] + bv;
  }
  const bool rg = nx->requires_grad || nb->requires_grad;
  auto n = new_node(nx->shape, std::move(out), rg);
  if (rg) {
    n->parents = {nx, nb};
    TensorNode* raw = n.get();
    n->backward = [raw, nx, nb, channels, inner]() {
      if (nx->requires_grad) {
        nx->ensure_grad();
        for (std::size_t i = 0; i < raw->grad.size(); ++i) nx->grad[i] += raw->grad[i];
      }
      if (nb->requires_grad) {
        nb->ensure_grad();
        for (std::size_t c = 0; c < channels; ++c) {
          double acc = 0.0;
          for (std::size_t i = 0; i < inner; ++i) acc += raw->grad[c * inner + i];
          nb->grad[c] += acc;
        }
      }
    };
  }
  return Tensor(n);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_finite(a, "matmul");
  require_finite(b, "matmul");
  const auto& na = a.node();
  const auto& nb = b.node();
  if (na->shape.size() != 2 || nb->shape.size() != 2 || na->shape[1] != nb->shape[0]) {
    throw std::invalid_argument("matmul: shape mismatch " + shape_str(na->shape) + " vs " +
                                shape_str(nb->shape));
  }
  const int m = na->shape[0], k = na->shape[1], p = nb->shape[1];
  std::vector<double> out(static_cast<std::size_t>(m) * p, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int kk = 0; kk < k; ++kk) {
      const double av = na->data[static_cast<std::size_t>(i) * k + kk];
      const double* brow = &nb->data[static_cast<std::size_t>(kk) * p];
      double* orow = &out[static_cast<std::size_t>(i) * p];
      for (int j = 0; j < p; ++j) orow[j] += av * brow[j];
    }
  }
  const bool rg = na->requires_grad || nb->requires_grad;
  auto n = new_node({m, p}, std::move(out), rg);
  if (rg) {
    n->parents = {na, nb};
    TensorNode* raw = n.get();
    n->backward = [raw, na, nb, m, k, p]() {
      if (na->requires_grad) {
        na->ensure_grad();
        for (int i = 0; i < m; ++i) {
          for (int kk = 0; kk < k; ++kk) {
            const double* brow = &nb->data[static_cast<std::size_t>(kk) * p];
            const double* grow = &raw->grad[static_cast<std::size_t>(i) * p];
            double acc = 0.0;
            for (int j = 0; j < p; ++j) acc += grow[j] * brow[j];
            na->grad[static_cast<std::size_t>(i) * k + kk] += acc;
          }
        }
      }
      if (nb->requires_grad) {
        nb->ensure_grad();
        for (int i = 0; i < m; ++i) {
          const double* grow = &raw->grad[static_cast<std::size_t>(i) * p];
          for (int kk = 0; kk < k; ++kk) {
            const double av = na->data[static_cast<std::size_t>(i) * k + kk];
            double* brow = &nb->grad[static_cast<std::size_t>(kk) * p];
            for (int j = 0; j < p; ++j) brow[j] += av * grow[j];
          }
        }
      }
    };
  }
  return Tensor(n);
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int stride, int pad) {
  check_conv_args(stride, pad, "conv2d");
  require_finite(x, "conv2d");
  require_finite(w, "conv2d");
  const auto& nx = x.node();
  const auto& nw = w.node();
  if (nx->shape.size() != 3 || nw->shape.size() != 4 || nw->shape[1] != nx->shape[0]) {
    throw std::invalid_argument("conv2d: shape mismatch input " + shape_str(nx->shape) +
                                " vs weight " + shape_str(nw->shape));
  }
  const int cin = nx->shape[0], h = nx->shape[1], wd = nx->shape[2];
  const int cout = nw->shape[0], kh = nw->shape[2], kw = nw->shape[3];
  const int ho = conv_out_size(h, kh, stride, pad);
  const int wo = conv_out_size(wd, kw, stride, pad);
  if (ho <= 0 || wo <= 0) {
    throw std::invalid_argument("conv2d: kernel " + shape_str(nw->shape) +
                                " does not fit input " + shape_str(nx->shape));
  }
  NodePtr nb;
  if (bias.valid()) {
    require_finite(bias, "conv2d");
    nb = bias.node();
    if (nb->shape.size() != 1 || nb->shape[0] != cout) {
      throw std::invalid_argument("conv2d: bias shape " + shape_str(nb->shape) +
                                  " does not match " + std::to_string(cout) + " channels");
    }
  }

  std::vector<double> out(static_cast<std::size_t>(cout) * ho * wo, 0.0);
  for (int oc = 0; oc < cout; ++oc) {
    if (nb) {
      const double bv = nb->data[oc];
      std::fill_n(&out[static_cast<std::size_t>(oc) * ho * wo], static_cast<std::size_t>(ho) * wo, bv);
    }
    for (int ic = 0; ic < cin; ++ic) {
      const double* xplane = &nx->data[static_cast<std::size_t>(ic) * h * wd];
      for (int ky = 0; ky < kh; ++ky) {
        const int oy_lo = std::max(0, ceildiv(pad - ky, stride));
        const int oy_hi = std::min(ho - 1, floordiv(h - 1 + pad - ky, stride));
        for (int kx = 0; kx < kw; ++kx) {
          const double wv =
              nw->data[((static_cast<std::size_t>(oc) * cin + ic) * kh + ky) * kw + kx];
          const int ox_lo = std::max(0, ceildiv(pad - kx, stride));
          const int ox_hi = std::min(wo - 1, floordiv(wd - 1 + pad - kx, stride));
          for (int oy = oy_lo; oy <= oy_hi; ++oy) {
            const int iy = oy * stride + ky - pad;
            const double* xrow = &xplane[static_cast<std::size_t>(iy) * wd + kx - pad];
            double* orow = &out[(static_cast<std::size_t>(oc) * ho + oy) * wo];
            if (stride == 1) {
              for (int ox = ox_lo; ox <= ox_hi; ++ox) orow[ox] += wv * xrow[ox];
            } else {
              for (int ox = ox_lo; ox <= ox_hi; ++ox) orow[ox] += wv * xrow[2 * ox];
            }
          }
        }
      }
    }
  }

  const bool rg = nx->requires_grad || nw->requires_grad || (nb && nb->requires_grad);
  auto n = new_node({cout, ho, wo}, std::move(out), rg);
  if (rg) {
    n->parents = {nx, nw};
    if (nb) n->parents.push_back(nb);
    TensorNode* raw = n.get();
    n->backward = [raw, nx, nw, nb, cin, h, wd, cout, kh, kw, ho, wo, stride, pad]() {
      if (nx->requires_grad) {
        nx->ensure_grad();
        for (int oc = 0; oc < cout; ++oc) {
          for (int ic = 0; ic < cin; ++ic) {
            double* gxplane = &nx->grad[static_cast<std::size_t>(ic) * h * wd];
            for (int ky = 0; ky < kh; ++ky) {
              const int oy_lo = std::max(0, ceildiv(pad - ky, stride));
              const int oy_hi = std::min(ho - 1, floordiv(h - 1 + pad - ky, stride));
              for (int kx = 0; kx < kw; ++kx) {
                const double wv =
                    nw->data[((static_cast<std::size_t>(oc) * cin + ic) * kh + ky) * kw + kx];
                const int ox_lo = std::max(0, ceildiv(pad - kx, stride));
                const int ox_hi = std::min(wo - 1, floordiv(wd - 1 + pad - kx, stride));
                for (int oy = oy_lo; oy <= oy_hi; ++oy) {
                  const int iy = oy * stride + ky - pad;
                  double* gxrow = &gxplane[static_cast<std::size_t>(iy) * wd + kx - pad];
                  const double* grow = &raw->grad[(static_cast<std::size_t>(oc) * ho + oy) * wo];
                  if (stride == 1) {
                    for (int ox = ox_lo; ox <= ox_hi; ++ox) gxrow[ox] += wv * grow[ox];
                  } else {
                    for (int ox = ox_lo; ox <= ox_hi; ++ox) gxrow[2 * ox] += wv * grow[ox];
                  }
                }
              }
            }
          }
        }
      }
      if (nw->requires_grad) {
        nw->ensure_grad();
        for (int oc = 0; oc < cout; ++oc) {
          for (int ic = 0; ic < cin; ++ic) {
            const double* xplane = &nx->data[static_cast<std::size_t>(ic) * h * wd];
            for (int ky = 0; ky < kh; ++ky) {
              const int oy_lo = std::max(0, ceildiv(pad - ky, stride));
              const int oy_hi = std::min(ho - 1, floordiv(h - 1 + pad - ky, stride));
              for (int kx = 0; kx < kw; ++kx) {
                const int ox_lo = std::max(0, ceildiv(pad - kx, stride));
                const int ox_hi = std::min(wo - 1, floordiv(wd - 1 + pad - kx, stride));
                double acc = 0.0;
                for (int oy = oy_lo; oy <= oy_hi; ++oy) {
                  const int iy = oy * stride + ky - pad;
                  const double* xrow = &xplane[static_cast<std::size_t>(iy) * wd + kx - pad];
                  const double* grow = &raw->grad[(static_cast<std::size_t>(oc) * ho + oy) * wo];
                  if (stride == 1) {
                    for (int ox = ox_lo; ox <= ox_hi; ++ox) acc += grow[ox] * xrow[ox];
                  } else {
                    for (int ox = ox_lo; ox <= ox_hi; ++ox) acc += grow[ox] * xrow[2 * ox];
                  }
                }
                nw->grad[((static_cast<std::size_t>(oc) * cin + ic) * kh + ky) * kw + kx] += acc;
              }
            }
          }
        }
      }
      if (nb && nb->requires_grad) {
        nb->ensure_grad();
        for (int oc = 0; oc < cout; ++oc) {
          const double* gplane = &raw->grad[static_cast<std::size_t>(oc) * ho * wo];
          double acc = 0.0;
          for (std::size_t i = 0; i < static_cast<std::size_t>(ho) * wo; ++i) acc += gplane[i];
          nb->grad[oc] += acc;
        }
      }
    };
  }
  return Tensor(n);
}

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, int stride, int pad) {
  check_conv_args(stride, pad, "conv1d");
  require_finite(x, "conv1d");
  require_finite(w, "conv1d");
  const auto& nx = x.node();
  const auto& nw = w.node();
  if (nx->shape.size() != 2 || nw->shape.size() != 3 || nw->shape[1] != nx->shape[0]) {
    throw std::invalid_argument("conv1d: shape mismatch input " + shape_str(nx->shape) +
                                " vs weight " + shape_str(nw->shape));
  }
  const int cin = nx->shape[0], len = nx->shape[1];
  const int cout = nw->shape[0], k = nw->shape[2];
  const int lo = conv_out_size(len, k, stride, pad);
  if (lo <= 0) {
    throw std::invalid_argument("conv1d: kernel " + shape_str(nw->shape) + " does not fit input " +
                                shape_str(nx->shape));
  }
  NodePtr nb;
  if (bias.valid()) {
    require_finite(bias, "conv1d");
    nb = bias.node();
    if (nb->shape.size() != 1 || nb->shape[0] != cout) {
      throw std::invalid_argument("conv1d: bias shape " + shape_str(nb->shape) +
                                  " does not match " + std::to_string(cout) + " channels");
    }
  }

  std::vector<double> out(static_cast<std::size_t>(cout) * lo, 0.0);
  for (int oc = 0; oc < cout; ++oc) {
    double* orow = &out[static_cast<std::size_t>(oc) * lo];
    if (nb) std::fill_n(orow, lo, nb->data[oc]);
    for (int ic = 0; ic < cin; ++ic) {
      const double* xrow = &nx->data[static_cast<std::size_t>(ic) * len];
      for (int kx = 0; kx < k; ++kx) {
        const double wv = nw->data[(static_cast<std::size_t>(oc) * cin + ic) * k + kx];
        const int o_lo = std::max(0, ceildiv(pad - kx, stride));
        const int o_hi = std::min(lo - 1, floordiv(len - 1 + pad - kx, stride));
        for (int o = o_lo; o <= o_hi; ++o) orow[o] += wv * xrow[o * stride + kx - pad];
      }
    }
  }

  const bool rg = nx->requires_grad || nw->requires_grad || (nb && nb->requires_grad);
  auto n = new_node({cout, lo}, std::move(out), rg);
  if (rg) {
    n->parents = {nx, nw};
    if (nb) n->parents.push_back(nb);
    TensorNode* raw = n.get();
    n->backward = [raw, nx, nw, nb, cin, len, cout, k, lo, stride, pad]() {
      for (int oc = 0; oc < cout; ++oc) {
        const double* grow = &raw->grad[static_cast<std::size_t>(oc) * lo];
        for (int ic = 0; ic < cin; ++ic) {
          for (int kx = 0; kx < k; ++kx) {
            const int o_lo = std::max(0, ceildiv(pad - kx, stride));
            const int o_hi = std::min(lo - 1, floordiv(len - 1 + pad - kx, stride));
            const std::size_t widx = (static_cast<std::size_t>(oc) * cin + ic) * k + kx;
            if (nx->requires_grad) {
              nx->ensure_grad();
              const double wv = nw->data[widx];
              double* gxrow = &nx->grad[static_cast<std::size_t>(ic) * len];
              for (int o = o_lo; o <= o_hi; ++o) gxrow[o * stride + kx - pad] += wv * grow[o];
            }
            if (nw->requires_grad) {
              nw->ensure_grad();
              const double* xrow = &nx->data[static_cast<std::size_t>(ic) * len];
              double acc = 0.0;
              for (int o = o_lo; o <= o_hi; ++o) acc += grow[o] * xrow[o * stride + kx - pad];
              nw->grad[widx] += acc;
            }
          }
        }
        if (nb && nb->requires_grad) {
          nb->ensure_grad();
          double acc = 0.0;
          for (int o = 0; o < lo; ++o) acc += grow[o];
          nb->grad[oc] += acc;
        }
      }
    };
  }
  return Tensor(n);
}

Tensor relu(const Tensor& x) {
  require_finite(x, "relu");
  const auto& nx = x.node();
  std::vector<double> out(nx->numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = nx->data[i] > 0.0 ? nx->data[i] : 0.0;
  auto n = new_node(nx->shape, std::move(out), nx->requires_grad);
  if (n->requires_grad) {
    n->parents = {nx};
    TensorNode* raw = n.get();
    n->backward = [raw, nx]() {
      nx->ensure_grad();
      for (std::size_t i = 0; i < raw->grad.size(); ++i) {
        if (nx->data[i] > 0.0) nx->grad[i] += raw->grad[i];
      }
    };
  }
  return Tensor(n);
}

Tensor sigmoid(const Tensor& x) {
  require_finite(x, "sigmoid");
  const auto& nx = x.node();
  std::vector<double> out(nx->numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = nx->data[i];
    out[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  auto n = new_node(nx->shape, std::move(out), nx->requires_grad);
  if (n->requires_grad) {
    n->parents = {nx};
    TensorNode* raw = n.get();
    n->backward = [raw, nx]() {
      nx->ensure_grad();
      for (std::size_t i = 0; i < raw->grad.size(); ++i) {
        const double y = raw->data[i];
        nx->grad[i] += raw->grad[i] * y * (1.0 - y);
      }
    };
  }
  return Tensor(n);
}

Tensor sum(const Tensor& x) {
  require_finite(x, "sum");
  const auto& nx = x.node();
  double acc = 0.0;
  for (double v : nx->data) acc += v;
  auto n = new_node({1}, {acc}, nx->requires_grad);
  if (n->requires_grad) {
    n->parents = {nx};
    TensorNode* raw = n.get();
    n->backward = [raw, nx]() {
      nx->ensure_grad();
      const double g = raw->grad[0];
      for (std::size_t i = 0; i < nx->grad.size(); ++i) nx->grad[i] += g;
    };
  }
  return Tensor(n);
}

Tensor mean(const Tensor& x) {
  require_finite(x, "mean");
  const auto& nx = x.node();
  double acc = 0.0;
  for (double v : nx->data) acc += v;
  const double inv = 1.0 / static_cast<double>(nx->numel());
  auto n = new_node({1}, {acc * inv}, nx->requires_grad);
  if (n->requires_grad) {
    n->parents = {nx};
    TensorNode* raw = n.get();
    n->backward = [raw, nx, inv]() {
      nx->ensure_grad();
      const double g = raw->grad[0] * inv;
      for (std::size_t i = 0; i < nx->grad.size(); ++i) nx->grad[i] += g;
    };
  }
  return Tensor(n);
}

Tensor reshape(const Tensor& x, Shape shape) {
  require_finite(x, "reshape");
  const auto& nx = x.node();
  if (shape_numel(shape) != nx->numel()) {
    throw std::invalid_argument("reshape: cannot view " + shape_str(nx->shape) + " as " +
                                shape_str(shape));
  }
  auto n = new_node(std::move(shape), nx->data, nx->requires_grad);
  if (n->requires_grad) {
    n->parents = {nx};
    TensorNode* raw = n.get();
    n->backward = [raw, nx]() {
      nx->ensure_grad();
      for (std::size_t i = 0; i < raw->grad.size(); ++i) nx->grad[i] += raw->grad[i];
    };
  }
  return Tensor(n);
}

Tensor concat(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat: no operands");
  const auto& first = node_of(xs[0], "concat");
  int dim0 = 0;
  bool rg = false;
  for (const Tensor& t : xs) {
    require_finite(t, "concat");
    const auto& n = t.node();
    if (n->shape.size() != first->shape.size() ||
        !std::equal(n->shape.begin() + 1, n->shape.end(), first->shape.begin() + 1)) {
      throw std::invalid_argument("concat: incompatible shapes " + shape_str(first->shape) +
                                  " vs " + shape_str(n->shape));
    }
    dim0 += n->shape[0];
    rg = rg || n->requires_grad;
  }
  Shape out_shape = first->shape;
  out_shape[0] = dim0;
  std::vector<double> out;
  out.reserve(shape_numel(out_shape));
  for (const Tensor& t : xs) {
    const auto& d = t.node()->data;
    out.insert(out.end(), d.begin(), d.end());
  }
  auto n = new_node(std::move(out_shape), std::move(out), rg);
  if (rg) {
    std::vector<NodePtr> parents;
    parents.reserve(xs.size());
    for (const Tensor& t : xs) parents.push_back(t.node());
    n->parents = parents;
    TensorNode* raw = n.get();
    n->backward = [raw, parents]() {
      std::size_t offset = 0;
      for (const NodePtr& p : parents) {
        if (p->requires_grad) {
          p->ensure_grad();
          for (std::size_t i = 0; i < p->numel(); ++i) p->grad[i] += raw->grad[offset + i];
        }
        offset += p->numel();
      }
    };
  }
  return Tensor(n);
}

Tensor upsample_nearest1d(const Tensor& x, int factor) {
  require_finite(x, "upsample_nearest1d");
  if (factor < 1) throw std::invalid_argument("upsample_nearest1d: factor must be >= 1");
  const auto& nx = x.node();
  if (nx->shape.size() != 2) {
    throw std::invalid_argument("upsample_nearest1d: expected (C, L), got " +
                                shape_str(nx->shape));
  }
  const int c = nx->shape[0], len = nx->shape[1];
  const int lout = len * factor;
  std::vector<double> out(static_cast<std::size_t>(c) * lout);
  for (int ch = 0; ch < c; ++ch) {
    for (int l = 0; l < lout; ++l) {
      out[static_cast<std::size_t>(ch) * lout + l] =
          nx->data[static_cast<std::size_t>(ch) * len + l / factor];
    }
  }
  auto n = new_node({c, lout}, std::move(out), nx->requires_grad);
  if (n->requires_grad) {
    n->parents = {nx};
    TensorNode* raw = n.get();
    n->backward = [raw, nx, c, len, lout, factor]() {
      nx->ensure_grad();
      for (int ch = 0; ch < c; ++ch) {
        for (int l = 0; l < lout; ++l) {
          nx->grad[static_cast<std::size_t>(ch) * len + l / factor] +=
              raw->grad[static_cast<std::size_t>(ch) * lout + l];
        }
      }
    };
  }
  return Tensor(n);
}

Tensor pixel_shuffle1d(const Tensor& x) {
  require_finite(x, "pixel_shuffle1d");
  const auto& nx = x.node();
  if (nx->shape.size() != 2 || nx->shape[0] % 2 != 0) {
    throw std::invalid_argument("pixel_shuffle1d: expected (2C, L), got " + shape_str(nx->shape));
  }
  const int c_out = nx->shape[0] / 2, len = nx->shape[1];
  const int l_out = 2 * len;
  std::vector<double> out(static_cast<std::size_t>(c_out) * l_out);
  for (int c = 0; c < c_out; ++c) {
    for (int l = 0; l < len; ++l) {
      for (int r = 0; r < 2; ++r) {
        out[static_cast<std::size_t>(c) * l_out + 2 * l + r] =
            nx->data[(static_cast<std::size_t>(2 * c) + r) * len + l];
      }
    }
  }
  auto n = new_node({c_out, l_out}, std::move(out), nx->requires_grad);
  if (n->requires_grad) {
    n->parents = {nx};
    TensorNode* raw = n.get();
    n->backward = [raw, nx, c_out, len, l_out]() {
      nx->ensure_grad();
      for (int c = 0; c < c_out; ++c) {
        for (int l = 0; l < len; ++l) {
          for (int r = 0; r < 2; ++r) {
            nx->grad[(static_cast<std::size_t>(2 * c) + r) * len + l] +=
                raw->grad[static_cast<std::size_t>(c) * l_out + 2 * l + r];
          }
        }
      }
    };
  }
  return Tensor(n);
}

Tensor crop1d(const Tensor& x, int len) {
  require_finite(x, "crop1d");
  const auto& nx = x.node();
  if (nx->shape.size() != 2) {
    throw std::invalid_argument("crop1d: expected (C, L), got " + shape_str(nx->shape));
  }
  const int c = nx->shape[0], lin = nx->shape[1];
  if (len < 1 || len > lin) {
    throw std::invalid_argument("crop1d: length " + std::to_string(len) + " out of range for " +
                                shape_str(nx->shape));
  }
  std::vector<double> out(static_cast<std::size_t>(c) * len);
  for (int ch = 0; ch < c; ++ch) {
    for (int l = 0; l < len; ++l) {
      out[static_cast<std::size_t>(ch) * len + l] = nx->data[static_cast<std::size_t>(ch) * lin + l];
    }
  }
  auto n = new_node({c, len}, std::move(out), nx->requires_grad);
  if (n->requires_grad) {
    n->parents = {nx};
    TensorNode* raw = n.get();
    n->backward = [raw, nx, c, lin, len]() {
      nx->ensure_grad();
      for (int ch = 0; ch < c; ++ch) {
        for (int l = 0; l < len; ++l) {
          nx->grad[static_cast<std::size_t>(ch) * lin + l] +=
              raw->grad[static_cast<std::size_t>(ch) * len + l];
        }
      }
    };
  }
  return Tensor(n);
}

Tensor bce_with_logits_sum(const Tensor& logits, const Tensor& targets) {
  require_same_shape(logits, targets, "bce_with_logits_sum");
  require_finite(logits, "bce_with_logits_sum");
  const auto& nl = logits.node();
  const auto& nt = targets.node();
  if (nt->requires_grad) {
    throw std::invalid_argument("bce_with_logits_sum: targets must not require grad");
  }
  for (double y : nt->data) {
    if (y != 0.0 && y != 1.0) {
      throw std::invalid_argument("bce_with_logits_sum: target values must be exactly 0 or 1");
    }
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < nl->numel(); ++i) {
    const double l = nl->data[i];
    const double y = nt->data[i];
    acc += std::max(l, 0.0) - l * y + std::log1p(std::exp(-std::abs(l)));
  }
  auto n = new_node({1}, {acc}, nl->requires_grad);
  if (n->requires_grad) {
    n->parents = {nl, nt};
    TensorNode* raw = n.get();
    n->backward = [raw, nl, nt]() {
      nl->ensure_grad();
      const double g = raw->grad[0];
      for (std::size_t i = 0; i < nl->numel(); ++i) {
        const double l = nl->data[i];
        const double s = l >= 0.0 ? 1.0 / (1.0 + std::exp(-l)) : std::exp(l) / (1.0 + std::exp(l));
        nl->grad[i] += g * (s - nt->data[i]);
      }
    };
  }
  return Tensor(n);
}

void backward(const Tensor& loss) {
  const auto& root = node_of(loss, "backward");
  if (root->numel() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                shape_str(root->shape));
  }
  if (!root->requires_grad) return;

  // Depth-first topological order over the grad-requiring subgraph.
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> seen;
  std::vector<std::pair<TensorNode*, std::size_t>> stack;
  stack.emplace_back(root.get(), 0);
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorNode* p = node->parents[next++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode* node = *it;
    if (node->backward && node->grad.size() == node->data.size()) node->backward();
  }
}

}  // namespace routediff
