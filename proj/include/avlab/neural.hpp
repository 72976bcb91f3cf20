#pragma once

// Small ReLU multilayer perceptron, classification losses and plain SGD with
// step-decay schedule and weight decay.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "avlab/tensor.hpp"

namespace avlab {

class MlpModel {
 public:
  MlpModel() = default;

  // He-scaled normal weights, zero biases.
  static MlpModel init(std::vector<std::size_t> layer_sizes, std::uint64_t seed);
  static MlpModel zeros(std::vector<std::size_t> layer_sizes);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t num_classes() const { return sizes_.back(); }
  std::size_t num_layers() const { return weights_.size(); }

  // Logits for x [n x input_dim]. With param_grad = false the parameters
  // enter the graph as constants, so only input gradients are recorded.
  Tensor forward(const Tensor& x, bool param_grad = true) const;

  // Parameter leaves in a fixed order: W0, b0, W1, b1, ...
  std::vector<Tensor> parameters() const;
  Tensor& weight(std::size_t layer) { return weights_.at(layer); }
  Tensor& bias(std::size_t layer) { return biases_.at(layer); }
  const Tensor& weight(std::size_t layer) const { return weights_.at(layer); }
  const Tensor& bias(std::size_t layer) const { return biases_.at(layer); }

  // Deep copy with independent storage.
  MlpModel clone() const;
  // FNV-1a over the raw parameter bytes.
  std::uint64_t checksum() const;

  // Checkpoint: "AVLBMLP\0", u32 version, u32 layer count, u64 sizes, then
  // per layer W (row-major [in x out]) and b as little-endian f64.
  void save(const std::string& path) const;
  static MlpModel load(const std::string& path);

 private:
  std::vector<std::size_t> sizes_;
  std::vector<Tensor> weights_;
  std::vector<Tensor> biases_;
};

// Mean over rows of -sum_j y_j log softmax(z)_j. Rows of y_soft must sum to 1
// within 1e-6.
Tensor soft_cross_entropy(const Tensor& logits, const Tensor& y_soft);
// Hard-label cross-entropy (one-hot soft targets).
Tensor cross_entropy(const Tensor& logits, std::span<const int> labels);
// Sum over rows of max_{j != y} z_j - z_y. Positive iff the row is misclassified
// (up to ties).
Tensor cw_margin_loss(const Tensor& logits, std::span<const int> labels);

Tensor one_hot(std::span<const int> labels, std::size_t k);

struct TrainConfig {
  std::size_t total_steps = 4000;
  std::size_t batch_size = 128;
  double lr0 = 0.1;
  double decay_factor = 0.1;
  std::vector<double> decay_points = {0.5, 0.75};
  double weight_decay = 2e-4;
  double momentum = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// lr for 1-based step t: lr0 * decay_factor^#{p : t >= ceil(p * total_steps)}.
double learning_rate(const TrainConfig& cfg, std::size_t t);

struct SgdState {
  std::vector<std::vector<double>> velocity;
};

// theta <- theta - lr(t) (grad + weight_decay theta) for each parameter leaf,
// then clears the grads. Throws NumericError if an update is non-finite.
void sgd_step(std::span<Tensor> params, std::size_t t, const TrainConfig& cfg,
              SgdState* state = nullptr);
void sgd_step(MlpModel& model, std::size_t t, const TrainConfig& cfg, SgdState* state = nullptr);

// argmax per row; ties go to the smallest class index.
std::vector<int> argmax_rows(const Tensor& logits);
std::vector<int> predict(const MlpModel& model, const Tensor& x);
double accuracy(const MlpModel& model, const Tensor& x, std::span<const int> labels);
double accuracy_from_logits(const Tensor& logits, std::span<const int> labels);

}  // namespace avlab
