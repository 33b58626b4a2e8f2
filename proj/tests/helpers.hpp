#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "routediff/rng.hpp"
#include "routediff/tensor.hpp"

namespace routediff::testutil {

// Central finite differences of a rebuilt-forward closure with respect to
// every component of every parameter. The closure must re-run the forward
// pass from the parameters' current data.
inline std::vector<std::vector<double>> finite_difference_grads(
    const std::function<double()>& forward, std::vector<Tensor>& params, double h = 1e-5) {
  std::vector<std::vector<double>> grads;
  grads.reserve(params.size());
  for (Tensor& p : params) {
    std::vector<double> g(p.numel());
    auto data = p.data_mut();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + h;
      const double hi = forward();
      data[i] = saved - h;
      const double lo = forward();
      data[i] = saved;
      g[i] = (hi - lo) / (2.0 * h);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

// Relative error with a unit floor so near-zero gradients compare absolutely.
inline double grad_rel_error(double analytic, double numeric) {
  const double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / denom;
}

inline double max_grad_rel_error(const std::vector<Tensor>& params,
                                 const std::vector<std::vector<double>>& fd) {
  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const auto g = params[pi].grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      worst = std::max(worst, grad_rel_error(g[i], fd[pi][i]));
    }
  }
  return worst;
}

inline Tensor random_tensor(Shape shape, Rng& rng, double lo, double hi, bool requires_grad) {
  std::vector<double> data(shape_numel(shape));
  for (double& v : data) v = rng.uniform(lo, hi);
  return Tensor::from_data(std::move(shape), std::move(data), requires_grad);
}

inline std::uint64_t file_checksum(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("file_checksum: cannot open " + path);
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return fnv1a64(buffer.str());
}

}  // namespace routediff::testutil
