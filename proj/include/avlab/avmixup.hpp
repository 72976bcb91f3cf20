#pragma once

// Label smoothing, Mixup, adversarial vertices and the AVmixup transform.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "avlab/rng.hpp"
#include "avlab/tensor.hpp"

namespace avlab {

struct AvmixupConfig {
  double gamma = 2.0;
  double lambda1 = 1.0;
  double lambda2 = 0.1;
  // Optional final clip of the virtual input into [clip_lo, clip_hi]; the
  // vertex itself is never clipped to the eps-ball.
  bool clip_to_range = false;
  double clip_lo = 0.0;
  double clip_hi = 1.0;

  void validate() const;
};

// lambda on the true class, (1 - lambda) / (k - 1) on every other class.
std::vector<double> smooth_labels(int y, std::size_t k, double lambda);
Tensor smooth_labels(std::span<const int> labels, std::size_t k, double lambda);

struct VirtualBatch {
  Tensor x;       // [n x d]
  Tensor y_soft;  // [n x k]
};

// alpha * (x_i, y_i) + (1 - alpha) * (x_j, y_j), one alpha per row.
VirtualBatch mixup(const Tensor& xi, const Tensor& yi, const Tensor& xj, const Tensor& yj,
                   std::span<const double> alpha);
VirtualBatch mixup(const Tensor& xi, const Tensor& yi, const Tensor& xj, const Tensor& yj,
                   double alpha);

// x + gamma * delta. Not projected onto the eps-ball.
Tensor adversarial_vertex(const Tensor& x, const Tensor& delta, double gamma);

// x_hat = alpha x + (1 - alpha) x_av,
// y_hat = alpha phi(y, lambda1) + (1 - alpha) phi(y, lambda2), one alpha per row.
VirtualBatch avmixup(const Tensor& x, std::span<const int> labels, const Tensor& delta,
                     std::size_t k, const AvmixupConfig& cfg, std::span<const double> alpha);

// alpha_i ~ U(0, 1) per example.
std::vector<double> draw_alphas(std::size_t n, Rng& rng);

// x + N(0, sigma^2) per element, clipped to [lo, hi].
Tensor gaussian_noise_augment(const Tensor& x, double sigma, Rng& rng, double lo = 0.0,
                              double hi = 1.0);

}  // namespace avlab
