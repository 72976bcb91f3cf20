#pragma once

// Closed-form errors, bounds and optima for the binary Gaussian models.
// Every quantity here has a sampling counterpart in monte_carlo.hpp.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "avlab/distributions.hpp"

namespace avlab {

// Standard normal CDF, Phi(x) = erfc(-x / sqrt 2) / 2.
double normal_cdf(double x);

// Predicts sign(w^T x); a score of exactly 0 is classified as +1.
struct LinearModel {
  std::vector<double> w;

  void validate() const;
  int predict(std::span<const double> x) const;
  double score(std::span<const double> x) const;
};

// w >= 0 with ||w||_1 = 1.
struct SimplexWeights {
  std::vector<double> w;

  void validate(double tol = 1e-12) const;
};

// Unit vector along z = (1/n) sum y_i x_i. Throws if z is zero.
LinearModel fit_mean_classifier(const LabeledBatch& batch);

// Misclassification probability of sign(w^T x) under x ~ N(y mu, diag(var)),
// with an l_inf adversary of budget eps (eps = 0 gives the standard error):
//   Phi(-(<w, mu> - eps ||w||_1) / sqrt(sum w_j^2 var_j)).
double linear_error_closed(std::span<const double> w, std::span<const double> mean,
                           std::span<const double> variance, double eps);

double standard_error_closed(const LinearModel& model, const GaussianSpec& spec);
double robust_error_closed(const LinearModel& model, const GaussianSpec& spec, double eps);

double psi_standard_error(std::span<const double> w, const PsiSpec& spec, PsiLaw law);
double psi_robust_error(std::span<const double> w, const PsiSpec& spec, PsiLaw law, double eps);

// Standard-error bound of the mean classifier trained on n samples:
//   exp(-(2 sqrt n - 1)^2 d / (2 (2 sqrt n + 4 sigma)^2 sigma^2)).
double schmidt_standard_bound(std::size_t n, std::size_t d, double sigma);
// Largest eps for which the mean classifier has l_inf-robust error <= beta:
//   (2 sqrt n - 1) / (2 sqrt n + 4 sigma) - sigma sqrt(2 log(1/beta)) / sqrt d.
// May be negative.
double schmidt_robust_eps(std::size_t n, std::size_t d, double sigma, double beta);
// Probability with which either bound above holds: 1 - 2 exp(-d / (8 (sigma^2 + 1))).
double schmidt_bound_probability(std::size_t d, double sigma);

// eps bound under which the robust-error bound at sigma_r = nu sigma_s matches
// the standard-error bound at sigma_s: (2 sqrt n - 1)(1 - nu) / (2 sqrt n + 4 sigma_s).
double theorem1_eps_bound(std::size_t n, double sigma_s, double nu);
// Joint probability factor of that statement.
double theorem1_probability(std::size_t d, double sigma_s, double nu);
// Rate at which the eps bound grows as sigma_r shrinks:
//   (2 sqrt n - 1) / (sigma_s (2 sqrt n + 4 sigma_s)).
double corollary1_slope(std::size_t n, double sigma_s);

// w^T Sigma w with Sigma the diagonal covariance of the chosen Psi law.
double variance_objective(std::span<const double> w, const PsiSpec& spec, PsiLaw law);

// Exact per-coordinate optimal weight of the sufficient non-robust block when
// minimizing the variance under the sample law:
//   sa^2 / ((d - c) sa^2 + (c + 1) sb^2).
double theorem2_optimal_wb(const PsiSpec& spec);
// Same under the true law, with weights tied inside {1..c+1} and {c+2..d+1}:
//   (sa^2 + c sb^2) / ((d - c)(sa^2 + c sb^2) + (c + 1)^2 sb^2).
double theorem3_optimal_wb(const PsiSpec& spec);
// The sa -> 0 limit of the above: c / (c d + 2 c + 1).
double theorem3_approx_wb(const PsiSpec& spec);

// Euclidean projection onto {w >= 0, sum w = 1}.
std::vector<double> project_to_simplex(std::span<const double> v);

enum class WeightTying {
  kNone,
  // w_i equal within {1..c+1} and within {c+2..d+1}.
  kTwoBlock,
};

struct SimplexFit {
  SimplexWeights weights;
  double objective = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;  // gradient-mapping norm at exit

  // Mean weight of the sufficient non-robust block {c+2..d+1}.
  double block_b(const PsiSpec& spec) const;
  double block_a(const PsiSpec& spec) const;
};

// Projected gradient with step 1 / (2 lambda_max(Sigma)) from the uniform
// point. Stops once the gradient-mapping norm drops below tol; throws
// NumericError after max_iterations.
SimplexFit minimize_variance_on_simplex(const PsiSpec& spec, PsiLaw law, double tol,
                                        WeightTying tying = WeightTying::kTwoBlock,
                                        std::size_t max_iterations = 100000);

// One trial of the sigma_s / sigma_r comparison: independent training sets
// of size n from the canonical (theta*, sigma_s) and (theta*, nu sigma_s)
// models, the robust error of the latter at eps = theorem1_eps_bound, and
// the standard-error bound at sigma_s.
struct Theorem1Trial {
  double eps = 0.0;
  double bound = 0.0;
  double standard_error_s = 0.0;
  double robust_error_r = 0.0;
  bool exceeds() const { return robust_error_r > bound; }
};

Theorem1Trial theorem1_trial(std::size_t n, std::size_t d, double sigma_s, double nu,
                             std::uint64_t seed);

}  // namespace avlab
