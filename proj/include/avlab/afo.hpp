#pragma once

// Adversarial training of the simplex-constrained linear classifier on the
// sample law of a PsiSpec, with the weights scored under the true law after
// every step.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "avlab/distributions.hpp"

namespace avlab {

enum class AfoLoss {
  kLogistic,        // log(1 + exp(-m))
  kSoftplusMargin,  // log(1 + exp(1 - m))
};

struct AfoRunConfig {
  PsiSpec spec;
  double eps = 0.2;
  std::size_t steps = 10000;
  double lr = 0.01;
  AfoLoss loss = AfoLoss::kLogistic;
  // Binary label smoothing: weight on the true label. 1 means hard labels.
  double label_lambda = 1.0;
  // Fixed training set size; 0 draws a fresh minibatch every step.
  std::size_t train_size = 500;
  std::size_t batch_size = 500;  // used in fresh-sample mode
  std::uint64_t seed = 0;

  // eps > eta is required unless eps == 0 (the standard-training control).
  void validate() const;
};

struct AfoRecord {
  std::size_t step = 0;
  double wb_l1 = 0.0;          // ||w_B||_1 over the sufficient non-robust block
  double wa_mean = 0.0;        // mean weight over features 1..c+1
  double adv_loss = 0.0;       // training loss on adversarial inputs
  double true_robust_err = 0.0;
  double true_std_err = 0.0;
  double true_variance = 0.0;  // w^T Sigma_true w
};

struct Trajectory {
  std::vector<AfoRecord> records;  // steps + 1 entries, index 0 = initialization
  std::vector<double> final_w;
};

// delta = -eps y sign(w), the maximizer of the loss decrease for a linear score.
std::vector<double> worst_case_delta_linear(std::span<const double> w, int y, double eps);

Trajectory adversarial_train_linear(const AfoRunConfig& config);

struct AfoSummary {
  std::size_t best_step = 0;  // first step of minimum true robust error
  double best_robust_err = 0.0;
  double final_robust_err = 0.0;
  double robust_gap = 0.0;  // final - best
  std::size_t best_std_step = 0;
  double best_std_err = 0.0;
  double final_std_err = 0.0;
  double std_gap = 0.0;
  double target_wb = 0.0;
  std::size_t closest_step = 0;  // step of minimum |mean w_B - target_wb|
  double closest_distance = 0.0;
  double final_distance = 0.0;
  double final_wb_l1 = 0.0;
  std::vector<double> distance;  // |mean w_B - target_wb| per record

  bool robust_overshoot() const { return best_step < final_step && robust_gap > 0.0; }
  bool weight_overshoot() const {
    return closest_step < final_step && final_distance > closest_distance;
  }
  std::size_t final_step = 0;
};

AfoSummary afo_report(const Trajectory& traj, const PsiSpec& spec, double target_wb);

void write_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace avlab
