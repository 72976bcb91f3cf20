#pragma once

// Experiment driver: datasets, the adversarial training loop with its
// defenses, white-box evaluation, transfer matrices and the Clean/Noise
// comparison of Mixup variants.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "avlab/attacks.hpp"
#include "avlab/avmixup.hpp"
#include "avlab/distributions.hpp"
#include "avlab/neural.hpp"

namespace avlab {

struct DatasetConfig {
  std::string source = "mixture";  // mixture | csv | idx
  MixtureSpec mixture;
  std::size_t train_size = 5000;
  std::size_t val_size = 1000;
  std::size_t test_size = 2000;
  std::uint64_t seed = 0;
  // csv: one file each. idx: "images_path,labels_path".
  std::string train_path;
  std::string test_path;
  int num_classes = 10;  // file sources only; the mixture carries its own

  void validate() const;
};

struct Dataset {
  LabeledBatch train;
  LabeledBatch val;
  LabeledBatch test;
  int num_classes = 0;

  std::size_t dim() const { return train.dim(); }
};

// Features land in [0, 1]; the scaler is fitted on the training split only.
// File sources carve the validation split off the end of the training file.
Dataset load_dataset(const DatasetConfig& cfg);

enum class DefenseKind {
  kStandard,
  kPgdAt,
  kLabelSmoothing,
  kMixup,
  kAvmixup,
  kNoisyMixup,
  kGvrm,
};

struct Defense {
  DefenseKind kind = DefenseKind::kPgdAt;
  double ls_lambda = 0.9;      // ls
  AvmixupConfig avmixup;       // avmixup
  double noise_sigma = 0.1;    // noisy-mixup, gvrm

  // standard | pgd-at | ls:<lambda> | mixup | avmixup | noisy-mixup:<sigma> | gvrm:<sigma>
  static Defense parse(const std::string& text);
  std::string name() const;
  bool adversarial() const;
  void validate() const;
};

struct ExperimentConfig {
  std::string name = "run";
  DatasetConfig data;
  std::vector<std::size_t> hidden = {128, 128};
  TrainConfig train;
  AttackConfig attack;  // train-time perturbation and validation budget
  Defense defense;
  std::vector<std::string> eval_attacks = {"clean", "fgsm", "pgd10", "pgd20", "cw20"};
  double eval_eps = -1.0;        // negative: use attack.eps
  std::size_t eval_every = 0;    // 0: max(1, total_steps / 100)
  std::size_t val_pgd_iters = 10;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t validation_interval() const;
  // Attack settings for evaluation, with the eval_eps override applied.
  AttackConfig eval_attack() const;
};

struct CurvePoint {
  std::size_t step = 0;
  double clean_val_acc = 0.0;
  double pgd_val_acc = 0.0;
  double train_loss = 0.0;  // mean over the steps since the previous point
};

struct TrainResult {
  MlpModel model;       // final weights
  MlpModel best_model;  // weights at the best PGD validation point
  std::vector<CurvePoint> curve;
  std::size_t best_index = 0;

  double best_pgd_val() const { return curve.at(best_index).pgd_val_acc; }
  double final_pgd_val() const { return curve.back().pgd_val_acc; }
};

// Steps at which validation runs: every interval, plus total_steps itself.
std::vector<std::size_t> validation_steps(std::size_t total_steps, std::size_t interval);

TrainResult train(const ExperimentConfig& config, const Dataset& data);

// "clean", "fgsm", "pgd<N>", "cw<N>".
struct AttackSpec {
  enum class Kind { kClean, kFgsm, kPgd, kCw } kind = Kind::kClean;
  std::size_t iters = 0;

  static AttackSpec parse(const std::string& name);
  std::string name() const;
};

struct EvalReport {
  std::vector<std::pair<std::string, double>> accuracy;  // in request order
  double eps = 0.0;
  std::uint64_t seed = 0;

  double at(const std::string& attack) const;
};

// Rows are processed in fixed shards of kEvalShard, each with its own
// derived seed, so results do not depend on the worker count.
inline constexpr std::size_t kEvalShard = 256;

// Adversarial rows for one attack against `model`.
Tensor generate_adversarial(const MlpModel& model, const LabeledBatch& data, const AttackSpec& spec,
                            const AttackConfig& base, std::uint64_t seed, std::size_t workers);

EvalReport evaluate(const MlpModel& model, const std::vector<std::string>& attacks,
                    const LabeledBatch& test, const AttackConfig& base, std::uint64_t seed,
                    std::size_t workers);

struct TransferMatrix {
  std::vector<std::string> names;
  // accuracy[d][a]: defender d on examples crafted against attacker a.
  std::vector<std::vector<double>> accuracy;

  // Lowest accuracy of `defender` over all other attackers.
  double black_box(std::size_t defender) const;
  double white_box(std::size_t defender) const { return accuracy.at(defender).at(defender); }
};

TransferMatrix transfer_matrix(const std::vector<std::pair<std::string, MlpModel>>& models,
                               const std::string& attack, const LabeledBatch& test,
                               const AttackConfig& base, std::uint64_t seed, std::size_t workers);

struct AppendixERow {
  std::string setting;
  double clean = 0.0;
  double noise = 0.0;
};

// Standard, Mixup, Gvrm and Noisy mixup trained from `base` (its defense is
// ignored), scored on the clean test split and on a fixed noisy copy of it.
std::vector<AppendixERow> appendix_e_experiment(const ExperimentConfig& base, const Dataset& data,
                                                double noise_sigma, std::size_t workers);

}  // namespace avlab
