#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "avlab/neural.hpp"
#include "avlab/rng.hpp"
#include "avlab/tensor.hpp"

namespace avlab::testing {

inline Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  std::vector<double> v(numel(shape));
  for (double& e : v) e = n(rng);
  return Tensor(std::move(shape), std::move(v));
}

inline Tensor random_uniform(Shape shape, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(numel(shape));
  for (double& e : v) e = u(rng);
  return Tensor(std::move(shape), std::move(v));
}

// |a - n| / max(|a|, |n|, floor). The floor sits above central-difference
// round-off at h = 1e-6, roughly 1e-10 for O(1) losses.
inline double rel_error(double a, double n, double floor = 1e-4) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

struct GradCheck {
  double worst = 0.0;
  std::size_t entries = 0;
};

// Fresh models have zero biases, so a row whose hidden units are all off
// gives exactly tied logits where max-type losses have no derivative.
// Random biases move the check to a generic point.
inline void randomize_biases(std::vector<Tensor>& params, Rng& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (Tensor& p : params)
    if (p.shape().size() == 1)
      for (double& v : p.mutable_data()) v = u(rng);
}

// Central differences of `loss` with respect to every element of every
// leaf, compared with the reverse-mode gradient. `loss` must rebuild the
// graph from the leaves on every call.
inline GradCheck check_gradients(std::vector<Tensor> leaves, const std::function<Tensor()>& loss,
                                 double h = 1e-6) {
  for (Tensor& t : leaves) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  loss().backward();
  std::vector<std::vector<double>> analytic;
  for (const Tensor& t : leaves) analytic.emplace_back(t.grad().begin(), t.grad().end());

  GradCheck out;
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    auto data = leaves[l].mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double keep = data[i];
      data[i] = keep + h;
      const double up = loss().item();
      data[i] = keep - h;
      const double down = loss().item();
      data[i] = keep;
      const double numeric = (up - down) / (2.0 * h);
      out.worst = std::max(out.worst, rel_error(analytic[l][i], numeric));
      ++out.entries;
    }
  }
  return out;
}

// Two-layer net whose loss touches every differentiable primitive: matmul,
// bias, relu, maximum, mul, sub, clamp, exp, log, log-softmax, sum, mean.
inline GradCheck check_random_net(std::uint64_t seed) {
  Rng rng = make_rng(seed, {0x9c});
  std::uniform_int_distribution<std::size_t> pick(2, 5);
  const std::size_t n = pick(rng), din = pick(rng), hid = pick(rng), k = pick(rng);
  Tensor x = random_tensor({n, din}, rng);
  Tensor w0 = random_tensor({din, hid}, rng, 0.8);
  Tensor b0 = random_tensor({hid}, rng, 0.3);
  Tensor w1 = random_tensor({hid, k}, rng, 0.8);
  Tensor b1 = random_tensor({k}, rng, 0.3);
  Tensor y = random_uniform({n, k}, rng, 0.1, 1.0);
  {
    auto d = y.mutable_data();
    for (std::size_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += d[r * k + j];
      for (std::size_t j = 0; j < k; ++j) d[r * k + j] /= s;
    }
  }
  auto loss = [&]() {
    Tensor h = relu(add_bias(matmul(x, w0), b0));
    Tensor z = add_bias(matmul(h, w1), b1);
    Tensor ce = mean(mul(neg(y), log_softmax(z)) * static_cast<double>(k));
    Tensor extra = mean(maximum(h, 0.3) * h) * 0.1 + sum(exp(clamp(z, -3.0, 3.0))) * 0.01 +
                   mean(log(h * h + 1.0)) - mean(sub(z, z * z * 0.05));
    return ce + extra;
  };
  return check_gradients({x, w0, b0, w1, b1}, loss);
}

}  // namespace avlab::testing
