#include "avlab/afo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "avlab/error.hpp"
#include "avlab/theory.hpp"

namespace avlab {

void AfoRunConfig::validate() const {
  spec.validate();
  if (!(eps >= 0.0)) throw InvalidArgument("AfoRunConfig: eps must be >= 0");
  if (eps > 0.0 && !(eps > spec.eta))
    throw InvalidArgument("AfoRunConfig: eps must exceed eta (or be 0 for the control run)");
  if (steps < 1) throw InvalidArgument("AfoRunConfig: steps must be >= 1");
  if (!(lr > 0.0)) throw InvalidArgument("AfoRunConfig: lr must be positive");
  if (!(label_lambda > 0.5 && label_lambda <= 1.0))
    throw InvalidArgument("AfoRunConfig: label_lambda must lie in (0.5, 1]");
  if (train_size == 0 && batch_size == 0)
    throw InvalidArgument("AfoRunConfig: batch_size must be positive in fresh-sample mode");
}

std::vector<double> worst_case_delta_linear(std::span<const double> w, int y, double eps) {
  if (eps < 0.0) throw InvalidArgument("worst_case_delta_linear: eps must be >= 0");
  std::vector<double> delta(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double s = w[j] > 0.0 ? 1.0 : (w[j] < 0.0 ? -1.0 : 0.0);
    delta[j] = -eps * y * s;
  }
  return delta;
}

namespace {

double softplus(double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }
double sigmoid(double v) {
  return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
}

// Loss and derivative in the margin m for one label orientation.
void margin_loss(AfoLoss kind, double m, double& value, double& slope) {
  const double shift = kind == AfoLoss::kSoftplusMargin ? 1.0 : 0.0;
  value = softplus(shift - m);
  slope = -sigmoid(shift - m);
}

// lambda L(m) + (1 - lambda) L(-m), with derivative in m.
void smoothed_loss(AfoLoss kind, double lambda, double m, double& value, double& slope) {
  double v1, s1;
  margin_loss(kind, m, v1, s1);
  value = lambda * v1;
  slope = lambda * s1;
  if (lambda < 1.0) {
    double v2, s2;
    margin_loss(kind, -m, v2, s2);
    value += (1.0 - lambda) * v2;
    slope -= (1.0 - lambda) * s2;
  }
}

AfoRecord make_record(std::size_t step, const std::vector<double>& w, const AfoRunConfig& cfg,
                      double adv_loss) {
  const PsiSpec& s = cfg.spec;
  AfoRecord r;
  r.step = step;
  for (std::size_t j = s.c + 1; j < s.dim(); ++j) r.wb_l1 += w[j];
  for (std::size_t j = 0; j <= s.c; ++j) r.wa_mean += w[j];
  r.wa_mean /= static_cast<double>(s.c + 1);
  r.adv_loss = adv_loss;
  r.true_robust_err = psi_robust_error(w, s, PsiLaw::kTrue, cfg.eps);
  r.true_std_err = psi_standard_error(w, s, PsiLaw::kTrue);
  r.true_variance = variance_objective(w, s, PsiLaw::kTrue);
  return r;
}

}  // namespace

Trajectory adversarial_train_linear(const AfoRunConfig& config) {
  config.validate();
  const PsiSpec& spec = config.spec;
  const std::size_t m = spec.dim();
  const bool fixed = config.train_size > 0;

  LabeledBatch train;
  if (fixed) train = sample_psi_sample(spec, config.train_size, derive_seed(config.seed, {0}));

  std::vector<double> w(m, 1.0 / static_cast<double>(m));
  std::vector<double> grad(m);
  Trajectory traj;
  traj.records.reserve(config.steps + 1);

  // Adversarial loss and its gradient on a batch at the current w. The
  // perturbation is held fixed when differentiating (inner maximizer).
  auto loss_and_grad = [&](const LabeledBatch& b) {
    std::fill(grad.begin(), grad.end(), 0.0);
    const std::size_t n = b.size();
    auto x = b.x.data();
    double total = 0.0;
    std::vector<double> xadv(m);
    for (std::size_t i = 0; i < n; ++i) {
      const int y = b.y[i];
      const auto delta = worst_case_delta_linear(w, y, config.eps);
      double score = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        xadv[j] = x[i * m + j] + delta[j];
        score += w[j] * xadv[j];
      }
      double value, slope;
      smoothed_loss(config.loss, config.label_lambda, y * score, value, slope);
      total += value;
      for (std::size_t j = 0; j < m; ++j) grad[j] += slope * y * xadv[j];
    }
    for (double& g : grad) g /= static_cast<double>(n);
    return total / static_cast<double>(n);
  };

  auto batch_for = [&](std::size_t step) {
    return fixed ? train
                 : sample_psi_sample(spec, config.batch_size, derive_seed(config.seed, {1, step}));
  };

  double loss = loss_and_grad(batch_for(0));
  traj.records.push_back(make_record(0, w, config, loss));
  for (std::size_t step = 1; step <= config.steps; ++step) {
    std::vector<double> cand(m);
    for (std::size_t j = 0; j < m; ++j) cand[j] = w[j] - config.lr * grad[j];
    w = project_to_simplex(cand);
    loss = loss_and_grad(batch_for(step));
    if (!std::isfinite(loss))
      throw NumericError("adversarial_train_linear: loss diverged at step " + std::to_string(step));
    traj.records.push_back(make_record(step, w, config, loss));
  }
  traj.final_w = w;
  return traj;
}

AfoSummary afo_report(const Trajectory& traj, const PsiSpec& spec, double target_wb) {
  if (traj.records.empty()) throw InvalidArgument("afo_report: empty trajectory");
  AfoSummary s;
  const auto& r = traj.records;
  const double nb = static_cast<double>(spec.d - spec.c);
  s.final_step = r.back().step;
  s.target_wb = target_wb;
  s.best_step = r[0].step;
  s.best_robust_err = r[0].true_robust_err;
  s.best_std_step = r[0].step;
  s.best_std_err = r[0].true_std_err;
  s.closest_step = r[0].step;
  s.closest_distance = std::abs(r[0].wb_l1 / nb - target_wb);
  for (const auto& rec : r) {
    const double dist = std::abs(rec.wb_l1 / nb - target_wb);
    s.distance.push_back(dist);
    if (rec.true_robust_err < s.best_robust_err) {
      s.best_robust_err = rec.true_robust_err;
      s.best_step = rec.step;
    }
    if (rec.true_std_err < s.best_std_err) {
      s.best_std_err = rec.true_std_err;
      s.best_std_step = rec.step;
    }
    if (dist < s.closest_distance) {
      s.closest_distance = dist;
      s.closest_step = rec.step;
    }
  }
  s.final_robust_err = r.back().true_robust_err;
  s.robust_gap = s.final_robust_err - s.best_robust_err;
  s.final_std_err = r.back().true_std_err;
  s.std_gap = s.final_std_err - s.best_std_err;
  s.final_distance = s.distance.back();
  s.final_wb_l1 = r.back().wb_l1;
  return s;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_trajectory_csv: cannot open " + path);
  out.precision(17);
  out << "step,wb_l1,wa_mean,adv_loss,true_robust_err,true_std_err\n";
  for (const auto& r : traj.records)
    out << r.step << ',' << r.wb_l1 << ',' << r.wa_mean << ',' << r.adv_loss << ','
        << r.true_robust_err << ',' << r.true_std_err << '\n';
  if (!out) throw IoError("write_trajectory_csv: write failed for " + path);
}

}  // namespace avlab
