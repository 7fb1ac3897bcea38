#pragma once

// Dense real tensors (rank 0..2) with reverse-mode automatic differentiation.
//
// A Tensor is a cheap handle onto a graph node. Operations on tensors that
// require gradients record their parents and a backward rule; calling
// backward() on a scalar result accumulates d(result)/d(leaf) into every
// reachable leaf that requires gradients.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pcct {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool has_grad = false;
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  std::vector<double>& ensure_grad();
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor vector(std::vector<double> values, bool requires_grad = false);
  static Tensor vector(std::initializer_list<double> values, bool requires_grad = false);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                       bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> values() const;
  // Writable view for leaves (parameter init, optimizer updates).
  std::span<double> mutable_values();
  double item() const;
  double operator()(std::size_t i) const;
  double operator()(std::size_t row, std::size_t col) const;

  bool requires_grad() const;
  bool is_leaf() const;
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Populates gradients of all reachable requires-grad leaves. Leaf gradients
  // accumulate across calls; intermediate gradients are recomputed each call.
  void backward() const;

  // New leaf holding a copy of the values; no graph, no grad.
  Tensor detach() const;
  // Deep copy that keeps requires_grad (for parameters).
  Tensor clone() const;

  const detail::Node* node() const { return node_.get(); }
  static Tensor from_node(std::shared_ptr<detail::Node> node);
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  detail::Node& checked() const;

  std::shared_ptr<detail::Node> node_;
};

// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

// Number of times a forward pass on this thread evaluated relu/hinge or a norm
// exactly at its nondifferentiable point. Used by the finite-difference checker.
std::size_t kink_hits();
void reset_kink_hits();

// ---- operations ----------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double offset);
Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor exp(const Tensor& x);
// x^exponent for x >= 0; derivative at x == 0 is taken as 0 when exponent != 1.
Tensor pow_scalar(const Tensor& x, double exponent);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// [n,k] x [k,m] -> [n,m]
Tensor matmul(const Tensor& a, const Tensor& b);
// [n,m] + [m] broadcast over rows
Tensor add_row_bias(const Tensor& x, const Tensor& bias);

// Rows of a matrix by index: [n,d] -> [len(idx), d]
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> idx);
// Single row as a vector: [n,d] -> [d]
Tensor row(const Tensor& x, std::size_t i);
// Contiguous sub-range of the flattened values reshaped to `shape`.
Tensor slice(const Tensor& x, std::size_t offset, Shape shape);
// Stack rank-0 tensors into a vector.
Tensor stack(std::span<const Tensor> scalars);

// L_p norm over the last axis: [d] -> [], [n,d] -> [n]. The gradient at the
// zero vector is taken as 0.
Tensor lp_norm(const Tensor& x, int p);

// x / ||x||_2 along the last axis; a zero row maps to zero with zero gradient.
Tensor l2_normalize(const Tensor& x);

// Row-wise log-softmax over the last axis ([k] or [n,k]).
Tensor log_softmax(const Tensor& logits);
// Picks one entry per row: [k] -> [], [n,k] -> [n]
Tensor pick(const Tensor& x, std::span<const std::size_t> labels);

}  // namespace pcct
