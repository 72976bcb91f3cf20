#include "avlab/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "avlab/error.hpp"
#include "avlab/rng.hpp"

namespace avlab {

void AttackConfig::validate() const {
  if (!(eps >= 0.0)) throw InvalidArgument("AttackConfig: eps must be >= 0");
  if (iters > 0 && !(step_size > 0.0))
    throw InvalidArgument("AttackConfig: step_size must be positive");
  if (!(clip_lo < clip_hi)) throw InvalidArgument("AttackConfig: need clip_lo < clip_hi");
}

Tensor project_linf(const Tensor& candidate, const Tensor& x, double eps, double lo, double hi) {
  if (candidate.shape() != x.shape()) throw InvalidArgument("project_linf: shape mismatch");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto c = candidate.data();
  auto xv = x.data();
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    double v = std::clamp(c[i], xv[i] - eps, xv[i] + eps);
    // x +/- eps may round outward; step back until the difference is exact.
    while (v - xv[i] > eps) v = std::nextafter(v, -kInf);
    while (xv[i] - v > eps) v = std::nextafter(v, kInf);
    out[i] = std::clamp(v, lo, hi);
  }
  return Tensor(x.shape(), std::move(out));
}

Tensor input_gradient(const MlpModel& model, const Tensor& x, std::span<const int> labels,
                      AttackLoss loss) {
  Tensor leaf = x.clone();
  leaf.set_requires_grad(true);
  const Tensor logits = model.forward(leaf, /*param_grad=*/false);
  Tensor l = loss == AttackLoss::kCwMargin
                 ? cw_margin_loss(logits, labels)
                 : mul(cross_entropy(logits, labels), static_cast<double>(labels.size()));
  l.backward();
  if (!leaf.has_grad()) return Tensor::zeros(x.shape());
  return Tensor(x.shape(), std::vector<double>(leaf.grad().begin(), leaf.grad().end()));
}

namespace {

Tensor signed_step(const Tensor& x_t, const Tensor& grad, double step) {
  auto xv = x_t.data();
  auto g = grad.data();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double s = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
    out[i] = xv[i] + step * s;
  }
  return Tensor(x_t.shape(), std::move(out));
}

}  // namespace

Tensor fgsm(const MlpModel& model, const Tensor& x, std::span<const int> labels,
            const AttackConfig& cfg) {
  cfg.validate();
  const Tensor g = input_gradient(model, x, labels, cfg.loss);
  return project_linf(signed_step(x, g, cfg.eps), x, cfg.eps, cfg.clip_lo, cfg.clip_hi);
}

Tensor pgd(const MlpModel& model, const Tensor& x, std::span<const int> labels,
           const AttackConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (cfg.iters == 0) throw InvalidArgument("pgd: iters must be >= 1");
  Tensor x_t = x.detach();
  if (cfg.random_start && cfg.eps > 0.0) {
    Rng rng = make_rng(seed, {0x5747});
    std::uniform_real_distribution<double> noise(-cfg.eps, cfg.eps);
    std::vector<double> start(x.size());
    auto xv = x.data();
    for (std::size_t i = 0; i < start.size(); ++i) start[i] = xv[i] + noise(rng);
    x_t = project_linf(Tensor(x.shape(), std::move(start)), x, cfg.eps, cfg.clip_lo, cfg.clip_hi);
  }
  for (std::size_t it = 0; it < cfg.iters; ++it) {
    const Tensor g = input_gradient(model, x_t, labels, cfg.loss);
    x_t = project_linf(signed_step(x_t, g, cfg.step_size), x, cfg.eps, cfg.clip_lo, cfg.clip_hi);
  }
  return x_t;
}

Tensor cw_pgd(const MlpModel& model, const Tensor& x, std::span<const int> labels,
              const AttackConfig& cfg, std::uint64_t seed) {
  AttackConfig c = cfg;
  c.loss = AttackLoss::kCwMargin;
  return pgd(model, x, labels, c, seed);
}

}  // namespace avlab
