#include "avlab/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "avlab/error.hpp"

namespace avlab {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace detail {

std::vector<double>& Node::grad_buffer() {
  if (grad.empty()) grad.assign(value->size(), 0.0);
  return grad;
}

}  // namespace detail

namespace {

using detail::Node;

void check_finite(const std::vector<double>& v, const std::string& op) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NumericError(op + ": non-finite value at element " + std::to_string(i));
    }
  }
}

std::shared_ptr<Node> make_leaf(Shape shape, std::vector<double> values) {
  if (numel(shape) != values.size()) {
    throw InvalidArgument("tensor: shape " + shape_str(shape) + " holds " +
                          std::to_string(numel(shape)) + " elements, got " +
                          std::to_string(values.size()));
  }
  check_finite(values, "tensor");
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::make_shared<std::vector<double>>(std::move(values));
  node->op = "leaf";
  return node;
}

}  // namespace

Tensor::Tensor() = default;

Tensor::Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : node_(make_leaf(std::move(shape), std::move(values))) {}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  std::vector<double> v(numel(shape), value);
  return Tensor(std::move(shape), std::move(v));
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::matrix(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.front().size() : 0;
  std::vector<double> v;
  v.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw InvalidArgument("matrix: ragged rows");
    v.insert(v.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(v));
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

const Shape& Tensor::shape() const { return node_->shape; }
std::size_t Tensor::size() const { return node_->value->size(); }

std::size_t Tensor::rows() const {
  if (rank() != 2) throw InvalidArgument("rows(): expected rank-2, got " + shape_str(shape()));
  return shape()[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw InvalidArgument("cols(): expected rank-2, got " + shape_str(shape()));
  return shape()[1];
}

std::span<const double> Tensor::data() const { return *node_->value; }

std::span<double> Tensor::mutable_data() {
  if (!node_->is_leaf) throw InvalidArgument("mutable_data(): tensor is an op result");
  return *node_->value;
}

double Tensor::item() const {
  if (size() != 1) throw InvalidArgument("item(): tensor has shape " + shape_str(shape()));
  return (*node_->value)[0];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool flag) {
  if (!node_->is_leaf) throw InvalidArgument("set_requires_grad(): only leaves can be marked");
  node_->requires_grad = flag;
  return *this;
}

bool Tensor::has_grad() const { return !node_->grad.empty(); }

std::span<const double> Tensor::grad() const { return node_->grad; }

void Tensor::zero_grad() { node_->grad.clear(); }

Tensor Tensor::detach() const {
  auto node = std::make_shared<Node>();
  node->shape = node_->shape;
  node->value = node_->value;
  node->op = "leaf";
  return Tensor(std::move(node));
}

Tensor Tensor::clone() const { return Tensor(shape(), *node_->value); }

Tensor Tensor::from_op(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
                       std::string op, std::function<void(detail::Node&)> backward) {
  check_finite(values, op);
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::make_shared<std::vector<double>>(std::move(values));
  node->is_leaf = false;
  node->op = std::move(op);
  bool any = false;
  for (const auto& p : parents) {
    if (p.node_->released) {
      throw InvalidArgument(node->op + ": input belongs to a released graph");
    }
    any = any || p.node_->requires_grad;
  }
  if (any) {
    node->requires_grad = true;
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(p.node_);
    node->backward_fn = std::move(backward);
  }
  return Tensor(std::move(node));
}

Tape::Tape(const Tensor& root) {
  // Iterative post-order DFS; post-order places parents before children.
  std::unordered_set<const Node*> seen;
  std::vector<std::pair<std::shared_ptr<Node>, std::size_t>> stack;
  const auto& r = root.node();
  if (!r->requires_grad) return;
  stack.emplace_back(r, 0);
  seen.insert(r.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      const auto& p = node->parents[next++];
      if (p->requires_grad && seen.insert(p.get()).second) stack.emplace_back(p, 0);
    } else {
      order_.push_back(node.get());
      owned_.push_back(std::move(node));
      stack.pop_back();
    }
  }
}

std::size_t Tape::index_of(const detail::Node* node) const {
  auto it = std::find(order_.begin(), order_.end(), node);
  if (it == order_.end()) throw InvalidArgument("tape: node not recorded");
  return static_cast<std::size_t>(it - order_.begin());
}

void Tensor::backward() const {
  if (size() != 1) {
    throw InvalidArgument("backward(): loss must be a scalar, got shape " + shape_str(shape()));
  }
  if (node_->released) {
    throw InvalidArgument("backward(): graph already consumed; re-run the forward pass");
  }
  if (!node_->requires_grad) {
    throw InvalidArgument("backward(): loss does not depend on any requires_grad tensor");
  }
  Tape tape(*this);
  const auto& order = tape.order();
  order.back()->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->is_leaf) continue;
    n->grad_buffer();
    n->backward_fn(*n);
    // Release interior state: closures, edges and the intermediate grad.
    n->backward_fn = nullptr;
    n->parents.clear();
    n->grad.clear();
    n->grad.shrink_to_fit();
    n->released = true;
  }
}

// ---------------------------------------------------------------------------
// Elementwise ops

namespace {

enum class Bcast { kSame, kAScalar, kBScalar };

Bcast broadcast_kind(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Bcast::kSame;
  if (b.size() == 1) return Bcast::kBScalar;
  if (a.size() == 1) return Bcast::kAScalar;
  throw InvalidArgument(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                        shape_str(b.shape()));
}

// Generic binary op. f(a, b) -> value; da(a, b), db(a, b) -> local partials.
template <typename F, typename DA, typename DB>
Tensor binary(const Tensor& a, const Tensor& b, const char* name, F f, DA da, DB db) {
  const Bcast kind = broadcast_kind(a, b, name);
  const Shape out_shape = kind == Bcast::kAScalar ? b.shape() : a.shape();
  const std::size_t n = numel(out_shape);
  auto av = a.data();
  auto bv = b.data();
  auto ai = [kind](std::size_t i) { return kind == Bcast::kAScalar ? 0 : i; };
  auto bi = [kind](std::size_t i) { return kind == Bcast::kBScalar ? 0 : i; };
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(av[ai(i)], bv[bi(i)]);
  return Tensor::from_op(out_shape, std::move(out), {a, b}, name,
                         [=](Node& self) {
                           Node& pa = *self.parents[0];
                           Node& pb = *self.parents[1];
                           const auto& va = *pa.value;
                           const auto& vb = *pb.value;
                           const auto& g = self.grad;
                           if (pa.requires_grad) {
                             auto& ga = pa.grad_buffer();
                             for (std::size_t i = 0; i < n; ++i)
                               ga[ai(i)] += g[i] * da(va[ai(i)], vb[bi(i)]);
                           }
                           if (pb.requires_grad) {
                             auto& gb = pb.grad_buffer();
                             for (std::size_t i = 0; i < n; ++i)
                               gb[bi(i)] += g[i] * db(va[ai(i)], vb[bi(i)]);
                           }
                         });
}

template <typename F, typename D>
Tensor unary(const Tensor& a, const char* name, F f, D d) {
  const std::size_t n = a.size();
  auto av = a.data();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(av[i]);
  return Tensor::from_op(a.shape(), std::move(out), {a}, name, [=](Node& self) {
    Node& pa = *self.parents[0];
    const auto& va = *pa.value;
    const auto& vo = *self.value;
    auto& ga = pa.grad_buffer();
    for (std::size_t i = 0; i < n; ++i) ga[i] += self.grad[i] * d(va[i], vo[i]);
  });
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

// Ties pass no gradient to either side (subgradient 0 at the kink).
Tensor maximum(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "max", [](double x, double y) { return x > y ? x : y; },
      [](double x, double y) { return x > y ? 1.0 : 0.0; },
      [](double x, double y) { return y > x ? 1.0 : 0.0; });
}

Tensor add(const Tensor& a, double b) {
  return unary(
      a, "add_scalar", [b](double x) { return x + b; }, [](double, double) { return 1.0; });
}

Tensor mul(const Tensor& a, double b) {
  return unary(
      a, "mul_scalar", [b](double x) { return x * b; }, [b](double, double) { return b; });
}

Tensor maximum(const Tensor& a, double b) {
  return unary(
      a, "max_scalar", [b](double x) { return x > b ? x : b; },
      [b](double x, double) { return x > b ? 1.0 : 0.0; });
}

Tensor neg(const Tensor& a) { return mul(a, -1.0); }

Tensor sign(const Tensor& a) {
  return unary(a, "sign", sign_of, [](double, double) { return 0.0; });
}

// Gradient 1 strictly inside (lo, hi), 0 at or beyond the endpoints.
Tensor clamp(const Tensor& a, double lo, double hi) {
  if (!(lo <= hi)) throw InvalidArgument("clamp: lo > hi");
  return unary(
      a, "clamp", [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

Tensor exp(const Tensor& a) {
  return unary(
      a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary(
      a, "log", [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor relu(const Tensor& a) { return maximum(a, 0.0); }

// ---------------------------------------------------------------------------
// Linear algebra and reductions

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
    throw InvalidArgument("matmul: inner extents differ " + shape_str(a.shape()) + " * " +
                          shape_str(b.shape()));
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  const double* A = a.data().data();
  const double* B = b.data().data();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      const double* brow = B + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += av * brow[j];
    }
  }
  return Tensor::from_op({m, n}, std::move(out), {a, b}, "matmul", [m, k, n](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const double* G = self.grad.data();
    if (pa.requires_grad) {
      // dA = G * B^T, accumulated as row axpys over a transposed copy of B.
      const double* Bv = pb.value->data();
      std::vector<double> bt(n * k);
      for (std::size_t p = 0; p < k; ++p)
        for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = Bv[p * n + j];
      double* dA = pa.grad_buffer().data();
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = G + i * n;
        double* drow = dA + i * k;
        for (std::size_t j = 0; j < n; ++j) {
          const double g = grow[j];
          const double* trow = bt.data() + j * k;
          for (std::size_t p = 0; p < k; ++p) drow[p] += g * trow[p];
        }
      }
    }
    if (pb.requires_grad) {
      // dB = A^T * G
      const double* Av = pa.value->data();
      double* dB = pb.grad_buffer().data();
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = G + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double av = Av[i * k + p];
          double* drow = dB + p * n;
          for (std::size_t j = 0; j < n; ++j) drow[j] += av * grow[j];
        }
      }
    }
  });
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  if (a.rank() != 2 || bias.size() != a.cols()) {
    throw InvalidArgument("add_bias: shape mismatch " + shape_str(a.shape()) + " vs " +
                          shape_str(bias.shape()));
  }
  const std::size_t m = a.rows(), n = a.cols();
  auto av = a.data();
  auto bv = bias.data();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = av[i * n + j] + bv[j];
  return Tensor::from_op({m, n}, std::move(out), {a, bias}, "add_bias", [m, n](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const auto& g = self.grad;
    if (pa.requires_grad) {
      auto& ga = pa.grad_buffer();
      for (std::size_t i = 0; i < m * n; ++i) ga[i] += g[i];
    }
    if (pb.requires_grad) {
      auto& gb = pb.grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
    }
  });
}

Tensor sum(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  const std::size_t n = a.size();
  return Tensor::from_op({}, {acc}, {a}, "sum", [n](Node& self) {
    auto& ga = self.parents[0]->grad_buffer();
    const double g = self.grad[0];
    for (std::size_t i = 0; i < n; ++i) ga[i] += g;
  });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw InvalidArgument("mean: empty tensor");
  return mul(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor log_softmax(const Tensor& logits) {
  const std::size_t m = logits.rows(), n = logits.cols();
  auto z = logits.data();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = z.data() + i * n;
    double mx = row[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::exp(row[j] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = row[j] - lse;
  }
  return Tensor::from_op({m, n}, std::move(out), {logits}, "log_softmax", [m, n](Node& self) {
    // d/dz_j = g_j - softmax_j * sum_l g_l
    auto& gz = self.parents[0]->grad_buffer();
    const auto& y = *self.value;
    const auto& g = self.grad;
    for (std::size_t i = 0; i < m; ++i) {
      double gs = 0.0;
      for (std::size_t j = 0; j < n; ++j) gs += g[i * n + j];
      for (std::size_t j = 0; j < n; ++j)
        gz[i * n + j] += g[i * n + j] - std::exp(y[i * n + j]) * gs;
    }
  });
}

}  // namespace avlab
