#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dgnn/error.hpp"

namespace dgnn {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

/// One recorded value in the compute graph. Leaves have no backward rule.
struct Node {
  const char* op = "leaf";
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until first touched by backward
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this->grad, accumulates into inputs' grads.
  std::function<void(Node&)> backward;

  bool is_leaf() const { return !backward; }
  std::vector<double>& grad_buffer();
};

}  // namespace detail

/// Dense row-major float64 tensor with optional participation in reverse-mode
/// differentiation. Copies share the underlying node; use clone() for a deep
/// copy of the value.
class Tensor {
 public:
  Tensor();
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor vector(std::vector<double> values, bool requires_grad = false);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                       bool requires_grad = false);

  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;
  std::size_t rows() const;  // rank-2 only
  std::size_t cols() const;  // rank-2 only

  std::span<const double> data() const { return node_->value; }
  /// Mutable access for leaves only (parameter updates, perturbation).
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t r, std::size_t c) const;

  bool requires_grad() const;
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  /// Reverse pass from a scalar. Leaf gradients accumulate across calls;
  /// intermediate gradients are recomputed each call.
  void backward() const;

  /// Detached deep copy of the value.
  Tensor clone(bool requires_grad = false) const;

  const char* op_name() const;
  bool same_node(const Tensor& other) const { return node_ == other.node_; }

  // Internal: used by op implementations.
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Throws NonFiniteError naming `what` if any element is NaN or Inf.
void require_finite(std::span<const double> values, const char* what);

}  // namespace dgnn
