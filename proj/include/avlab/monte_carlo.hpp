#pragma once

// Sampling estimators paired with the closed forms in theory.hpp. They draw
// full feature vectors and apply the adversary explicitly, so they share no
// algebra with the closed forms.

#include <cstddef>
#include <cstdint>
#include <span>

#include "avlab/distributions.hpp"
#include "avlab/theory.hpp"

namespace avlab {

struct McEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  std::size_t samples = 0;
};

// Error rate of sign(w^T (x + delta)) with delta = -eps y sign(w).
McEstimate mc_robust_error(const LinearModel& model, const GaussianSpec& spec, double eps,
                           std::size_t samples, std::uint64_t seed);
McEstimate mc_psi_robust_error(std::span<const double> w, const PsiSpec& spec, PsiLaw law,
                               double eps, std::size_t samples, std::uint64_t seed);
// Empirical variance of y w^T x (the score noise around its mean).
McEstimate mc_psi_score_variance(std::span<const double> w, const PsiSpec& spec, PsiLaw law,
                                 std::size_t samples, std::uint64_t seed);

}  // namespace avlab
