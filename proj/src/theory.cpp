#include "avlab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "avlab/error.hpp"

namespace avlab {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

void LinearModel::validate() const {
  double n2 = 0.0;
  for (double v : w) n2 += v * v;
  if (!(n2 > 0.0)) throw InvalidArgument("LinearModel: weight vector must be nonzero");
}

double LinearModel::score(std::span<const double> x) const {
  if (x.size() != w.size()) throw InvalidArgument("LinearModel: dimension mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
  return s;
}

int LinearModel::predict(std::span<const double> x) const { return score(x) >= 0.0 ? 1 : -1; }

void SimplexWeights::validate(double tol) const {
  double s = 0.0;
  for (double v : w) {
    if (v < 0.0) throw InvalidArgument("SimplexWeights: negative weight");
    s += v;
  }
  if (std::abs(s - 1.0) > tol) throw InvalidArgument("SimplexWeights: weights do not sum to 1");
}

LinearModel fit_mean_classifier(const LabeledBatch& batch) {
  batch.validate();
  const std::size_t n = batch.size(), d = batch.dim();
  std::vector<double> z(d, 0.0);
  auto x = batch.x.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) z[j] += batch.y[i] * x[i * d + j];
  double norm = 0.0;
  for (double& v : z) {
    v /= static_cast<double>(n);
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) throw NumericError("fit_mean_classifier: degenerate draw, mean vector is zero");
  for (double& v : z) v /= norm;
  return LinearModel{std::move(z)};
}

double linear_error_closed(std::span<const double> w, std::span<const double> mean,
                           std::span<const double> variance, double eps) {
  if (eps < 0.0) throw InvalidArgument("robust error: eps must be nonnegative");
  if (w.size() != mean.size() || w.size() != variance.size())
    throw InvalidArgument("robust error: dimension mismatch");
  double mu = 0.0, l1 = 0.0, var = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    mu += w[j] * mean[j];
    l1 += std::abs(w[j]);
    var += w[j] * w[j] * variance[j];
  }
  if (!(var > 0.0)) throw InvalidArgument("robust error: zero score variance");
  return normal_cdf(-(mu - eps * l1) / std::sqrt(var));
}

double standard_error_closed(const LinearModel& model, const GaussianSpec& spec) {
  return robust_error_closed(model, spec, 0.0);
}

double robust_error_closed(const LinearModel& model, const GaussianSpec& spec, double eps) {
  model.validate();
  spec.validate();
  const std::vector<double> var(spec.dim(), spec.sigma * spec.sigma);
  return linear_error_closed(model.w, spec.theta_star, var, eps);
}

double psi_standard_error(std::span<const double> w, const PsiSpec& spec, PsiLaw law) {
  return psi_robust_error(w, spec, law, 0.0);
}

double psi_robust_error(std::span<const double> w, const PsiSpec& spec, PsiLaw law, double eps) {
  return linear_error_closed(w, psi_means(spec, law), psi_variances(spec, law), eps);
}

namespace {

void check_nd_sigma(std::size_t n, std::size_t d, double sigma) {
  if (n < 1) throw InvalidArgument("bound: n must be >= 1");
  if (d < 1) throw InvalidArgument("bound: d must be >= 1");
  if (!(sigma > 0.0)) throw InvalidArgument("bound: sigma must be positive");
}

}  // namespace

double schmidt_standard_bound(std::size_t n, std::size_t d, double sigma) {
  check_nd_sigma(n, d, sigma);
  const double rn = std::sqrt(static_cast<double>(n));
  const double num = (2.0 * rn - 1.0) * (2.0 * rn - 1.0) * static_cast<double>(d);
  const double den = 2.0 * (2.0 * rn + 4.0 * sigma) * (2.0 * rn + 4.0 * sigma) * sigma * sigma;
  return std::exp(-num / den);
}

double schmidt_robust_eps(std::size_t n, std::size_t d, double sigma, double beta) {
  check_nd_sigma(n, d, sigma);
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("schmidt_robust_eps: beta must lie in (0,1)");
  const double rn = std::sqrt(static_cast<double>(n));
  return (2.0 * rn - 1.0) / (2.0 * rn + 4.0 * sigma) -
         sigma * std::sqrt(2.0 * std::log(1.0 / beta)) / std::sqrt(static_cast<double>(d));
}

double schmidt_bound_probability(std::size_t d, double sigma) {
  return 1.0 - 2.0 * std::exp(-static_cast<double>(d) / (8.0 * (sigma * sigma + 1.0)));
}

double theorem1_eps_bound(std::size_t n, double sigma_s, double nu) {
  if (!(nu >= 0.0 && nu <= 1.0)) throw InvalidArgument("theorem1: nu must lie in [0,1]");
  if (n < 1) throw InvalidArgument("theorem1: n must be >= 1");
  if (!(sigma_s > 0.0)) throw InvalidArgument("theorem1: sigma_s must be positive");
  const double rn = std::sqrt(static_cast<double>(n));
  return (2.0 * rn - 1.0) * (1.0 - nu) / (2.0 * rn + 4.0 * sigma_s);
}

double theorem1_probability(std::size_t d, double sigma_s, double nu) {
  if (!(nu >= 0.0 && nu <= 1.0)) throw InvalidArgument("theorem1: nu must lie in [0,1]");
  return schmidt_bound_probability(d, sigma_s) * schmidt_bound_probability(d, nu * sigma_s);
}

double corollary1_slope(std::size_t n, double sigma_s) {
  if (n < 1) throw InvalidArgument("corollary1: n must be >= 1");
  if (!(sigma_s > 0.0)) throw InvalidArgument("corollary1: sigma_s must be positive");
  const double rn = std::sqrt(static_cast<double>(n));
  return (2.0 * rn - 1.0) / (sigma_s * (2.0 * rn + 4.0 * sigma_s));
}

double variance_objective(std::span<const double> w, const PsiSpec& spec, PsiLaw law) {
  const auto var = psi_variances(spec, law);
  if (w.size() != var.size())
    throw InvalidArgument("variance_objective: expected " + std::to_string(var.size()) +
                          " weights, got " + std::to_string(w.size()));
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * w[j] * var[j];
  return s;
}

double theorem2_optimal_wb(const PsiSpec& spec) {
  spec.validate();
  const double va = spec.sigma_a * spec.sigma_a, vb = spec.sigma_b * spec.sigma_b;
  const double d = static_cast<double>(spec.d), c = static_cast<double>(spec.c);
  return va / ((d - c) * va + (c + 1.0) * vb);
}

double theorem3_optimal_wb(const PsiSpec& spec) {
  spec.validate();
  const double va = spec.sigma_a * spec.sigma_a, vb = spec.sigma_b * spec.sigma_b;
  const double d = static_cast<double>(spec.d), c = static_cast<double>(spec.c);
  const double a = va + c * vb;
  return a / ((d - c) * a + (c + 1.0) * (c + 1.0) * vb);
}

double theorem3_approx_wb(const PsiSpec& spec) {
  spec.validate();
  const double d = static_cast<double>(spec.d), c = static_cast<double>(spec.c);
  return c / (c * d + 2.0 * c + 1.0);
}

std::vector<double> project_to_simplex(std::span<const double> v) {
  if (v.empty()) throw InvalidArgument("project_to_simplex: empty vector");
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cumsum += u[i];
    const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  std::vector<double> w(v.size());
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    w[i] = std::max(v[i] - theta, 0.0);
    s += w[i];
  }
  for (double& x : w) x /= s;
  return w;
}

double SimplexFit::block_b(const PsiSpec& spec) const {
  double s = 0.0;
  for (std::size_t j = spec.c + 1; j < spec.dim(); ++j) s += weights.w[j];
  return s / static_cast<double>(spec.d - spec.c);
}

double SimplexFit::block_a(const PsiSpec& spec) const {
  double s = 0.0;
  for (std::size_t j = 0; j <= spec.c; ++j) s += weights.w[j];
  return s / static_cast<double>(spec.c + 1);
}

namespace {

void tie_blocks(std::vector<double>& w, const PsiSpec& spec) {
  auto avg = [&](std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t j = b; j < e; ++j) s += w[j];
    s /= static_cast<double>(e - b);
    for (std::size_t j = b; j < e; ++j) w[j] = s;
  };
  avg(0, spec.c + 1);
  avg(spec.c + 1, spec.dim());
}

}  // namespace

SimplexFit minimize_variance_on_simplex(const PsiSpec& spec, PsiLaw law, double tol,
                                        WeightTying tying, std::size_t max_iterations) {
  if (!(tol > 0.0)) throw InvalidArgument("minimize_variance_on_simplex: tol must be positive");
  const auto var = psi_variances(spec, law);
  const std::size_t m = var.size();
  const double lmax = *std::max_element(var.begin(), var.end());
  const double step = 1.0 / (2.0 * lmax);

  std::vector<double> w(m, 1.0 / static_cast<double>(m));
  std::vector<double> cand(m);
  SimplexFit fit;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    for (std::size_t j = 0; j < m; ++j) cand[j] = w[j] - step * 2.0 * var[j] * w[j];
    // Projection onto (simplex ∩ tied subspace) = simplex projection of the
    // block average, since the simplex projection preserves ties.
    if (tying == WeightTying::kTwoBlock) tie_blocks(cand, spec);
    cand = project_to_simplex(cand);
    double res = 0.0;
    for (std::size_t j = 0; j < m; ++j) res = std::max(res, std::abs(cand[j] - w[j]) / step);
    w.swap(cand);
    fit.iterations = it;
    fit.residual = res;
    if (res < tol) {
      fit.weights.w = w;
      fit.objective = variance_objective(w, spec, law);
      return fit;
    }
  }
  throw NumericError("minimize_variance_on_simplex: no convergence after " +
                     std::to_string(max_iterations) + " iterations, residual " +
                     std::to_string(fit.residual));
}

Theorem1Trial theorem1_trial(std::size_t n, std::size_t d, double sigma_s, double nu,
                             std::uint64_t seed) {
  Theorem1Trial t;
  t.eps = theorem1_eps_bound(n, sigma_s, nu);
  t.bound = schmidt_standard_bound(n, d, sigma_s);
  const double sigma_r = nu * sigma_s;
  const GaussianSpec spec_s = GaussianSpec::canonical(d, sigma_s);
  const LinearModel f_s = fit_mean_classifier(sample_gaussian(spec_s, n, derive_seed(seed, {1})));
  t.standard_error_s = standard_error_closed(f_s, spec_s);
  if (sigma_r > 0.0) {
    const GaussianSpec spec_r = GaussianSpec::canonical(d, sigma_r);
    const LinearModel f_r =
        fit_mean_classifier(sample_gaussian(spec_r, n, derive_seed(seed, {2})));
    t.robust_error_r = robust_error_closed(f_r, spec_r, t.eps);
  } else {
    // Noise-free limit: the classifier is theta*/||theta*|| and the margin
    // sqrt(d) (1 - eps) is deterministic.
    t.robust_error_r = t.eps < 1.0 ? 0.0 : 1.0;
  }
  return t;
}

}  // namespace avlab
