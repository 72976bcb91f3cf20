#pragma once

// Dense row-major tensor of doubles with a dynamic reverse-mode autodiff
// graph. A Tensor is a cheap handle; copies share the same node.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace avlab {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::shared_ptr<std::vector<double>> value;
  std::vector<double> grad;  // empty until touched by backward
  bool requires_grad = false;
  bool is_leaf = true;
  bool released = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into parents' grads.
  std::function<void(Node&)> backward_fn;
  std::string op;

  std::vector<double>& grad_buffer();
};

}  // namespace detail

class Tensor {
 public:
  Tensor();
  Tensor(Shape shape, std::vector<double> values);

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);
  // Row-major matrix literal, e.g. Tensor::matrix({{1, 2}, {3, 4}}).
  static Tensor matrix(const std::vector<std::vector<double>>& rows);
  static Tensor vector(std::vector<double> values);

  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  std::size_t rows() const;  // shape[0] of a rank-2 tensor
  std::size_t cols() const;  // shape[1] of a rank-2 tensor

  std::span<const double> data() const;
  // Direct write access. Only valid on leaves; mutating a tensor that is
  // already part of a recorded graph is an error.
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t i) const { return data()[i]; }
  double at(std::size_t r, std::size_t c) const { return data()[r * cols() + c]; }

  bool requires_grad() const;
  Tensor& set_requires_grad(bool flag);
  bool has_grad() const;
  std::span<const double> grad() const;
  void zero_grad();

  // New leaf sharing storage, detached from any graph.
  Tensor detach() const;
  // Deep copy as a fresh leaf.
  Tensor clone() const;

  // Populates grad of every requires_grad leaf reachable from this scalar.
  // The graph is released afterwards; calling backward twice is an error.
  void backward() const;

  bool defined() const { return static_cast<bool>(node_); }
  const std::shared_ptr<detail::Node>& node() const { return node_; }

  // Builds an op result. `backward` receives the result node (whose grad is
  // populated) and must accumulate into each parent's grad_buffer().
  static Tensor from_op(Shape shape, std::vector<double> values,
                        std::vector<Tensor> parents, std::string op,
                        std::function<void(detail::Node&)> backward);

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node);
  std::shared_ptr<detail::Node> node_;
};

// Topological record of the graph below `root` (requires_grad nodes only).
// Every parent precedes its children; each node appears once.
class Tape {
 public:
  explicit Tape(const Tensor& root);
  std::size_t size() const { return order_.size(); }
  const std::vector<detail::Node*>& order() const { return order_; }
  std::size_t index_of(const detail::Node* node) const;

 private:
  std::vector<detail::Node*> order_;
  // Keeps every recorded node alive while backward() severs graph edges.
  std::vector<std::shared_ptr<detail::Node>> owned_;
};

// Elementwise. Shapes must be equal, or one side must hold a single element.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor maximum(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, double b);
Tensor mul(const Tensor& a, double b);
Tensor maximum(const Tensor& a, double b);
Tensor neg(const Tensor& a);
Tensor sign(const Tensor& a);
Tensor clamp(const Tensor& a, double lo, double hi);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor relu(const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);
// [n x k] + [k] broadcast over rows.
Tensor add_bias(const Tensor& a, const Tensor& bias);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// Row-wise log-softmax of a rank-2 tensor, computed with a stable logsumexp.
Tensor log_softmax(const Tensor& logits);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator+(const Tensor& a, double b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, double b) { return add(a, -b); }
inline Tensor operator*(const Tensor& a, double b) { return mul(a, b); }
inline Tensor operator*(double a, const Tensor& b) { return mul(b, a); }
inline Tensor operator-(const Tensor& a) { return neg(a); }

}  // namespace avlab
