#pragma once

// White-box l_inf attacks: FGSM, PGD with cross-entropy, PGD with the CW
// margin loss. All attacks read the model through detached parameters and
// build a fresh graph per gradient evaluation.

#include <cstdint>
#include <span>
#include <string>

#include "avlab/neural.hpp"
#include "avlab/tensor.hpp"

namespace avlab {

enum class AttackLoss { kCrossEntropy, kCwMargin };

struct AttackConfig {
  double eps = 8.0 / 255.0;
  double step_size = 2.0 / 255.0;
  std::size_t iters = 10;
  bool random_start = true;
  AttackLoss loss = AttackLoss::kCrossEntropy;
  double clip_lo = 0.0;
  double clip_hi = 1.0;

  void validate() const;
};

// Projects each candidate onto B_inf(x, eps) ∩ [lo, hi]. The ball constraint
// holds exactly in floating point: |out - x| <= eps for every element.
Tensor project_linf(const Tensor& candidate, const Tensor& x, double eps, double lo, double hi);

// Gradient of the summed attack loss with respect to the input rows.
Tensor input_gradient(const MlpModel& model, const Tensor& x, std::span<const int> labels,
                      AttackLoss loss);

// x + eps sign(grad_x L), clipped. Iteration count and random start are ignored.
Tensor fgsm(const MlpModel& model, const Tensor& x, std::span<const int> labels,
            const AttackConfig& cfg);
// Iterated signed-gradient ascent with projection after every step; returns
// the final iterate.
Tensor pgd(const MlpModel& model, const Tensor& x, std::span<const int> labels,
           const AttackConfig& cfg, std::uint64_t seed);
// pgd() with the CW margin loss regardless of cfg.loss.
Tensor cw_pgd(const MlpModel& model, const Tensor& x, std::span<const int> labels,
              const AttackConfig& cfg, std::uint64_t seed);

}  // namespace avlab
