#include "avlab/neural.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "avlab/error.hpp"
#include "avlab/rng.hpp"

namespace avlab {

namespace {

void check_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) throw InvalidArgument("MlpModel: need at least input and output sizes");
  for (auto s : sizes)
    if (s == 0) throw InvalidArgument("MlpModel: zero layer size");
}

constexpr char kMagic[8] = {'A', 'V', 'L', 'B', 'M', 'L', 'P', '\0'};
constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_f64(std::ostream& out, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, sizeof v);
  put_u64(out, v);
}
std::uint64_t get_uint(std::istream& in, int bytes, const std::string& path) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = in.get();
    if (c == EOF) throw IoError("checkpoint " + path + ": truncated");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}
double get_f64(std::istream& in, const std::string& path) {
  const std::uint64_t v = get_uint(in, 8, path);
  double d;
  std::memcpy(&d, &v, sizeof d);
  return d;
}

}  // namespace

MlpModel MlpModel::init(std::vector<std::size_t> layer_sizes, std::uint64_t seed) {
  check_sizes(layer_sizes);
  MlpModel m;
  m.sizes_ = std::move(layer_sizes);
  Rng rng = make_rng(seed, {0x11e});
  for (std::size_t l = 0; l + 1 < m.sizes_.size(); ++l) {
    const std::size_t in = m.sizes_[l], out = m.sizes_[l + 1];
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(in)));
    std::vector<double> w(in * out);
    for (double& v : w) v = normal(rng);
    m.weights_.push_back(Tensor({in, out}, std::move(w)).set_requires_grad(true));
    m.biases_.push_back(Tensor::zeros({out}).set_requires_grad(true));
  }
  return m;
}

MlpModel MlpModel::zeros(std::vector<std::size_t> layer_sizes) {
  check_sizes(layer_sizes);
  MlpModel m;
  m.sizes_ = std::move(layer_sizes);
  for (std::size_t l = 0; l + 1 < m.sizes_.size(); ++l) {
    m.weights_.push_back(Tensor::zeros({m.sizes_[l], m.sizes_[l + 1]}).set_requires_grad(true));
    m.biases_.push_back(Tensor::zeros({m.sizes_[l + 1]}).set_requires_grad(true));
  }
  return m;
}

Tensor MlpModel::forward(const Tensor& x, bool param_grad) const {
  if (x.rank() != 2 || x.cols() != input_dim()) {
    throw InvalidArgument("MlpModel::forward: expected [n x " + std::to_string(input_dim()) +
                          "] input, got " + shape_str(x.shape()));
  }
  Tensor h = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const Tensor W = param_grad ? weights_[l] : weights_[l].detach();
    const Tensor b = param_grad ? biases_[l] : biases_[l].detach();
    h = add_bias(matmul(h, W), b);
    if (l + 1 < weights_.size()) h = relu(h);
  }
  return h;
}

std::vector<Tensor> MlpModel::parameters() const {
  std::vector<Tensor> p;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    p.push_back(weights_[l]);
    p.push_back(biases_[l]);
  }
  return p;
}

MlpModel MlpModel::clone() const {
  MlpModel m;
  m.sizes_ = sizes_;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    m.weights_.push_back(weights_[l].clone().set_requires_grad(true));
    m.biases_.push_back(biases_[l].clone().set_requires_grad(true));
  }
  return m;
}

std::uint64_t MlpModel::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : parameters()) {
    for (double d : p.data()) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &d, sizeof d);
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
      }
    }
  }
  return h;
}

void MlpModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("checkpoint: cannot open " + path + " for writing");
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(sizes_.size()));
  for (auto s : sizes_) put_u64(out, s);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (double v : weights_[l].data()) put_f64(out, v);
    for (double v : biases_[l].data()) put_f64(out, v);
  }
  if (!out) throw IoError("checkpoint: write failed for " + path);
}

MlpModel MlpModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open " + path);
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw IoError("checkpoint " + path + ": bad magic");
  const auto version = get_uint(in, 4, path);
  if (version != kCheckpointVersion)
    throw IoError("checkpoint " + path + ": unsupported version " + std::to_string(version));
  const auto count = get_uint(in, 4, path);
  if (count < 2 || count > 64) throw IoError("checkpoint " + path + ": bad layer count");
  std::vector<std::size_t> sizes(count);
  for (auto& s : sizes) {
    s = get_uint(in, 8, path);
    if (s == 0 || s > (1u << 24)) throw IoError("checkpoint " + path + ": bad layer size");
  }
  MlpModel m = zeros(sizes);
  for (std::size_t l = 0; l < m.weights_.size(); ++l) {
    for (double& v : m.weights_[l].mutable_data()) v = get_f64(in, path);
    for (double& v : m.biases_[l].mutable_data()) v = get_f64(in, path);
  }
  if (in.peek() != EOF) throw IoError("checkpoint " + path + ": trailing bytes");
  return m;
}

Tensor one_hot(std::span<const int> labels, std::size_t k) {
  std::vector<double> v(labels.size() * k, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k)
      throw InvalidArgument("one_hot: label " + std::to_string(labels[i]) + " out of range");
    v[i * k + static_cast<std::size_t>(labels[i])] = 1.0;
  }
  return Tensor({labels.size(), k}, std::move(v));
}

Tensor soft_cross_entropy(const Tensor& logits, const Tensor& y_soft) {
  if (logits.shape() != y_soft.shape()) {
    throw InvalidArgument("soft_cross_entropy: logits " + shape_str(logits.shape()) +
                          " vs targets " + shape_str(y_soft.shape()));
  }
  const std::size_t n = logits.rows(), k = logits.cols();
  auto t = y_soft.data();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += t[i * k + j];
    if (std::abs(s - 1.0) > 1e-6)
      throw InvalidArgument("soft_cross_entropy: target row " + std::to_string(i) +
                            " sums to " + std::to_string(s));
  }
  return mul(sum(mul(log_softmax(logits), y_soft.detach())), -1.0 / static_cast<double>(n));
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> labels) {
  return soft_cross_entropy(logits, one_hot(labels, logits.cols()));
}

Tensor cw_margin_loss(const Tensor& logits, std::span<const int> labels) {
  const std::size_t n = logits.rows(), k = logits.cols();
  if (k < 2) throw InvalidArgument("cw_margin_loss: need at least 2 classes");
  if (labels.size() != n) throw InvalidArgument("cw_margin_loss: label count mismatch");
  auto z = logits.data();
  std::vector<std::size_t> runner(n);
  std::vector<std::size_t> truth(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    if (labels[i] < 0 || y >= k) throw InvalidArgument("cw_margin_loss: label out of range");
    std::size_t best = y == 0 ? 1 : 0;
    for (std::size_t j = 0; j < k; ++j)
      if (j != y && z[i * k + j] > z[i * k + best]) best = j;
    runner[i] = best;
    truth[i] = y;
    total += z[i * k + best] - z[i * k + y];
  }
  return Tensor::from_op({}, {total}, {logits}, "cw_margin", [=](detail::Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    const double go = self.grad[0];
    for (std::size_t i = 0; i < n; ++i) {
      g[i * k + runner[i]] += go;
      g[i * k + truth[i]] -= go;
    }
  });
}

void TrainConfig::validate() const {
  if (total_steps == 0) throw InvalidArgument("TrainConfig: total_steps must be positive");
  if (batch_size == 0) throw InvalidArgument("TrainConfig: batch_size must be positive");
  if (!(lr0 > 0.0)) throw InvalidArgument("TrainConfig: lr0 must be positive");
  if (!(decay_factor > 0.0)) throw InvalidArgument("TrainConfig: decay_factor must be positive");
  if (!(weight_decay >= 0.0)) throw InvalidArgument("TrainConfig: weight_decay must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw InvalidArgument("TrainConfig: momentum must lie in [0,1)");
  double prev = 0.0;
  for (double p : decay_points) {
    if (!(p > prev && p < 1.0))
      throw InvalidArgument("TrainConfig: decay points must be strictly increasing in (0,1)");
    prev = p;
  }
}

double learning_rate(const TrainConfig& cfg, std::size_t t) {
  double lr = cfg.lr0;
  for (double p : cfg.decay_points) {
    const auto boundary =
        static_cast<std::size_t>(std::ceil(p * static_cast<double>(cfg.total_steps)));
    if (t >= boundary) lr *= cfg.decay_factor;
  }
  return lr;
}

void sgd_step(std::span<Tensor> params, std::size_t t, const TrainConfig& cfg, SgdState* state) {
  const double lr = learning_rate(cfg, t);
  if (state && cfg.momentum > 0.0 && state->velocity.size() != params.size()) {
    state->velocity.assign(params.size(), {});
    for (std::size_t i = 0; i < params.size(); ++i)
      state->velocity[i].assign(params[i].size(), 0.0);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    auto theta = p.mutable_data();
    auto grad = p.grad();
    const bool has = p.has_grad();
    for (std::size_t j = 0; j < theta.size(); ++j) {
      double g = (has ? grad[j] : 0.0) + cfg.weight_decay * theta[j];
      if (state && cfg.momentum > 0.0) {
        double& v = state->velocity[i][j];
        v = cfg.momentum * v + g;
        g = v;
      }
      const double next = theta[j] - lr * g;
      if (!std::isfinite(next))
        throw NumericError("sgd_step: non-finite update at step " + std::to_string(t));
      theta[j] = next;
    }
    p.zero_grad();
  }
}

void sgd_step(MlpModel& model, std::size_t t, const TrainConfig& cfg, SgdState* state) {
  auto params = model.parameters();
  sgd_step(params, t, cfg, state);
}

std::vector<int> argmax_rows(const Tensor& logits) {
  const std::size_t n = logits.rows(), k = logits.cols();
  auto z = logits.data();
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j)
      if (z[i * k + j] > z[i * k + best]) best = j;
    out[i] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> predict(const MlpModel& model, const Tensor& x) {
  return argmax_rows(model.forward(x.detach(), false));
}

double accuracy_from_logits(const Tensor& logits, std::span<const int> labels) {
  const auto pred = argmax_rows(logits);
  if (pred.size() != labels.size()) throw InvalidArgument("accuracy: label count mismatch");
  if (pred.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double accuracy(const MlpModel& model, const Tensor& x, std::span<const int> labels) {
  return accuracy_from_logits(model.forward(x.detach(), false), labels);
}

}  // namespace avlab
