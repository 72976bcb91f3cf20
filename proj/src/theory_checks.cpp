#include "avlab/theory_checks.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "avlab/error.hpp"
#include "avlab/monte_carlo.hpp"
#include "avlab/report.hpp"
#include "avlab/rng.hpp"
#include "avlab/theory.hpp"

namespace avlab {

namespace {

CheckRow row(std::string check, std::string item, double expected, double observed, double tol) {
  return {std::move(check), std::move(item), expected, observed, tol,
          std::abs(expected - observed) <= tol};
}

}  // namespace

std::vector<CheckRow> check_closed_form(const TheoryCheckOptions& opt) {
  std::vector<CheckRow> rows;
  Rng rng = make_rng(opt.seed, {0xc1});
  std::uniform_int_distribution<std::size_t> dim(2, 8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < opt.closed_form_configs; ++i) {
    const std::size_t d = dim(rng);
    GaussianSpec spec;
    spec.sigma = 0.5 + 1.5 * u(rng);
    for (std::size_t j = 0; j < d; ++j) spec.theta_star.push_back(0.2 + 0.8 * u(rng));
    LinearModel model;
    for (std::size_t j = 0; j < d; ++j) model.w.push_back(spec.theta_star[j] + 0.5 * normal(rng));
    const double eps = 0.25 * u(rng);
    for (const double e : {0.0, eps}) {
      const double p = robust_error_closed(model, spec, e);
      const McEstimate mc =
          mc_robust_error(model, spec, e, opt.mc_samples, derive_seed(opt.seed, {0xc2, i}));
      const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(opt.mc_samples));
      std::ostringstream item;
      item << "config" << i << (e == 0.0 ? "-standard" : "-robust") << " d=" << d;
      rows.push_back(row("closed-form", item.str(), p, mc.mean, opt.mc_sigmas * se + 1e-12));
    }
  }
  return rows;
}

std::vector<CheckRow> check_theorem1(const TheoryCheckOptions& opt) {
  std::vector<CheckRow> rows;
  const std::size_t n = 10, d = 100;
  const double sigma_s = 1.0;
  for (const double nu : {0.25, 0.5, 0.75}) {
    std::size_t exceed = 0;
    for (std::size_t t = 0; t < opt.theorem1_trials; ++t) {
      const std::uint64_t s = derive_seed(opt.seed, {0x71, static_cast<std::uint64_t>(nu * 1000), t});
      exceed += theorem1_trial(n, d, sigma_s, nu, s).exceeds();
    }
    const double q = 1.0 - theorem1_probability(d, sigma_s, nu);
    const double frac = static_cast<double>(exceed) / static_cast<double>(opt.theorem1_trials);
    const double allowed =
        q + 3.0 * std::sqrt(q * (1.0 - q) / static_cast<double>(opt.theorem1_trials));
    std::ostringstream item;
    item << "nu=" << nu << " failure-rate";
    // One-sided: the observed rate may be anywhere in [0, allowed].
    rows.push_back({"theorem1", item.str(), allowed, frac, allowed, frac <= allowed});
  }
  return rows;
}

std::vector<CheckRow> check_optima(const TheoryCheckOptions& opt) {
  std::vector<CheckRow> rows;
  Rng rng = make_rng(opt.seed, {0x23});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < opt.optima_specs; ++i) {
    PsiSpec spec;
    spec.d = 4 + static_cast<std::size_t>(u(rng) * 27);
    spec.c = 1 + static_cast<std::size_t>(u(rng) * static_cast<double>(spec.d - 1));
    spec.sigma_a = 0.05 + 0.45 * u(rng);
    spec.sigma_b = 1.0;
    spec.eta = 0.1;
    std::ostringstream item;
    item << "d=" << spec.d << " c=" << spec.c << " sa=" << spec.sigma_a;
    const SimplexFit s2 = minimize_variance_on_simplex(spec, PsiLaw::kSample, 1e-10);
    rows.push_back(row("theorem2", item.str(), theorem2_optimal_wb(spec), s2.block_b(spec), 1e-6));
    const SimplexFit s3 = minimize_variance_on_simplex(spec, PsiLaw::kTrue, 1e-10);
    rows.push_back(row("theorem3", item.str(), theorem3_optimal_wb(spec), s3.block_b(spec), 1e-6));
  }
  PsiSpec lim;
  lim.sigma_a = 1e-6;
  const double c = static_cast<double>(lim.c), d = static_cast<double>(lim.d);
  rows.push_back(row("theorem3-limit", "sa=1e-6", c / (c * d + 2 * c + 1), theorem3_optimal_wb(lim),
                     1e-9));
  return rows;
}

std::vector<CheckRow> check_bounds(const TheoryCheckOptions& opt) {
  (void)opt;
  std::vector<CheckRow> rows;
  for (const std::size_t n : {1, 10, 100}) {
    for (const double sigma_s : {0.5, 1.0, 2.0}) {
      for (const double nu : {0.25, 0.5, 0.75}) {
        const std::size_t d = 100;
        // The robust-error bound at sigma_r = nu sigma_s, evaluated at the
        // standard-error bound's beta, admits at least the Theorem 1 budget.
        const double beta = schmidt_standard_bound(n, d, sigma_s);
        const double robust_eps = schmidt_robust_eps(n, d, nu * sigma_s, beta);
        const double t1 = theorem1_eps_bound(n, sigma_s, nu);
        std::ostringstream item;
        item << "n=" << n << " sigma_s=" << sigma_s << " nu=" << nu;
        rows.push_back({"theorem1-vs-robust-eps", item.str(), robust_eps, t1, 0.0,
                        t1 <= robust_eps + 1e-12});
      }
      // Slope in sigma_r of the Theorem 1 budget, by central differences.
      const double h = 1e-6;
      const double nu0 = 0.5;
      const double fd = (theorem1_eps_bound(n, sigma_s, nu0 + h / sigma_s) -
                         theorem1_eps_bound(n, sigma_s, nu0 - h / sigma_s)) /
                        (2 * h);
      std::ostringstream item;
      item << "n=" << n << " sigma_s=" << sigma_s;
      rows.push_back(row("corollary1-slope", item.str(), corollary1_slope(n, sigma_s), -fd, 1e-6));
    }
  }
  return rows;
}

std::vector<CheckRow> run_theory_checks(const std::string& which, const TheoryCheckOptions& opt) {
  std::vector<CheckRow> rows;
  auto append = [&](std::vector<CheckRow> more) {
    rows.insert(rows.end(), more.begin(), more.end());
  };
  const bool all = which == "all";
  if (!all && which != "closed-form" && which != "theorem1" && which != "optima" &&
      which != "bounds")
    throw InvalidArgument("unknown check '" + which +
                          "' (all, closed-form, theorem1, optima, bounds)");
  if (all || which == "closed-form") append(check_closed_form(opt));
  if (all || which == "theorem1") append(check_theorem1(opt));
  if (all || which == "optima") append(check_optima(opt));
  if (all || which == "bounds") append(check_bounds(opt));
  return rows;
}

void write_check_csv(const std::vector<CheckRow>& rows, const std::string& path) {
  std::ostringstream s;
  s << "check,item,expected,observed,tolerance,pass\n";
  for (const auto& r : rows)
    s << r.check << ',' << r.item << ',' << format_double(r.expected) << ','
      << format_double(r.observed) << ',' << format_double(r.tolerance) << ','
      << (r.pass ? "true" : "false") << '\n';
  write_text(s.str(), path);
}

}  // namespace avlab
