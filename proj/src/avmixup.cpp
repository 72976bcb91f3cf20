#include "avlab/avmixup.hpp"

#include <algorithm>
#include <random>

#include "avlab/error.hpp"

namespace avlab {

void AvmixupConfig::validate() const {
  if (!(gamma >= 1.0)) throw InvalidArgument("AvmixupConfig: gamma must be >= 1");
  for (double l : {lambda1, lambda2})
    if (!(l > 0.0 && l <= 1.0)) throw InvalidArgument("AvmixupConfig: lambda must lie in (0,1]");
  if (clip_to_range && !(clip_lo < clip_hi))
    throw InvalidArgument("AvmixupConfig: need clip_lo < clip_hi");
}

std::vector<double> smooth_labels(int y, std::size_t k, double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw InvalidArgument("smooth_labels: lambda must lie in (0,1], got " + std::to_string(lambda));
  if (k < 2) throw InvalidArgument("smooth_labels: need k >= 2");
  if (y < 0 || static_cast<std::size_t>(y) >= k)
    throw InvalidArgument("smooth_labels: label out of range");
  std::vector<double> v(k, (1.0 - lambda) / static_cast<double>(k - 1));
  v[static_cast<std::size_t>(y)] = lambda;
  return v;
}

Tensor smooth_labels(std::span<const int> labels, std::size_t k, double lambda) {
  std::vector<double> out;
  out.reserve(labels.size() * k);
  for (int y : labels) {
    const auto row = smooth_labels(y, k, lambda);
    out.insert(out.end(), row.begin(), row.end());
  }
  return Tensor({labels.size(), k}, std::move(out));
}

namespace {

Tensor interpolate_rows(const Tensor& a, const Tensor& b, std::span<const double> alpha) {
  if (a.shape() != b.shape())
    throw InvalidArgument("interpolate: shape mismatch " + shape_str(a.shape()) + " vs " +
                          shape_str(b.shape()));
  const std::size_t n = a.rows(), d = a.cols();
  if (alpha.size() != n) throw InvalidArgument("interpolate: one alpha per row required");
  auto av = a.data();
  auto bv = b.data();
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = alpha[i];
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("interpolate: alpha must lie in [0,1]");
    for (std::size_t j = 0; j < d; ++j)
      out[i * d + j] = t * av[i * d + j] + (1.0 - t) * bv[i * d + j];
  }
  return Tensor(a.shape(), std::move(out));
}

}  // namespace

VirtualBatch mixup(const Tensor& xi, const Tensor& yi, const Tensor& xj, const Tensor& yj,
                   std::span<const double> alpha) {
  if (xi.rank() != 2 || yi.rank() != 2 || xi.rows() != yi.rows())
    throw InvalidArgument("mixup: inputs must be [n x d] with [n x k] labels");
  return VirtualBatch{interpolate_rows(xi, xj, alpha), interpolate_rows(yi, yj, alpha)};
}

VirtualBatch mixup(const Tensor& xi, const Tensor& yi, const Tensor& xj, const Tensor& yj,
                   double alpha) {
  if (xi.rank() != 2) throw InvalidArgument("mixup: inputs must be rank 2");
  const std::vector<double> a(xi.rows(), alpha);
  return mixup(xi, yi, xj, yj, a);
}

Tensor adversarial_vertex(const Tensor& x, const Tensor& delta, double gamma) {
  if (!(gamma >= 1.0)) throw InvalidArgument("adversarial_vertex: gamma must be >= 1");
  if (x.shape() != delta.shape())
    throw InvalidArgument("adversarial_vertex: shape mismatch " + shape_str(x.shape()) + " vs " +
                          shape_str(delta.shape()));
  auto xv = x.data();
  auto dv = delta.data();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] + gamma * dv[i];
  return Tensor(x.shape(), std::move(out));
}

VirtualBatch avmixup(const Tensor& x, std::span<const int> labels, const Tensor& delta,
                     std::size_t k, const AvmixupConfig& cfg, std::span<const double> alpha) {
  cfg.validate();
  if (x.rows() != labels.size()) throw InvalidArgument("avmixup: label count mismatch");
  const Tensor x_av = adversarial_vertex(x, delta, cfg.gamma);
  VirtualBatch out{interpolate_rows(x, x_av, alpha),
                   interpolate_rows(smooth_labels(labels, k, cfg.lambda1),
                                    smooth_labels(labels, k, cfg.lambda2), alpha)};
  if (cfg.clip_to_range) out.x = clamp(out.x, cfg.clip_lo, cfg.clip_hi).detach();
  return out;
}

std::vector<double> draw_alphas(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> a(n);
  for (double& v : a) v = u(rng);
  return a;
}

Tensor gaussian_noise_augment(const Tensor& x, double sigma, Rng& rng, double lo, double hi) {
  if (!(sigma >= 0.0)) throw InvalidArgument("gaussian_noise_augment: sigma must be >= 0");
  if (sigma == 0.0) return x.detach();
  std::normal_distribution<double> normal(0.0, sigma);
  auto xv = x.data();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(xv[i] + normal(rng), lo, hi);
  return Tensor(x.shape(), std::move(out));
}

}  // namespace avlab
