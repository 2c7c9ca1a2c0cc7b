#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace comgrl {

using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Thrown when operands of a primitive have incompatible shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/**
 * Dense 2-D array that participates in a reverse-mode differentiation graph.
 *
 * A Tensor is a cheap handle; copies share the same node. Results of
 * primitives in ops.hpp record their parents and a local backward rule, so
 * calling backward() on a 1x1 result fills grad() of every reachable tensor
 * created with requires_grad.
 *
 * Leaf gradients accumulate across backward() calls until zero_grad().
 * Intermediate gradients are recomputed on each call.
 */
class Tensor {
 public:
  Tensor();

  static Tensor constant(Matrix value);
  static Tensor parameter(Matrix value);

  const Matrix& value() const { return node_->value; }
  /// Direct write access for optimizers and tests. Does not touch the graph.
  Matrix& mutable_value() { return node_->value; }

  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return node_->parents.empty(); }

  bool has_grad() const { return node_->grad.has_value(); }
  const Matrix& grad() const;
  void zero_grad() { node_->grad.reset(); }

  /// Value of a 1x1 tensor.
  double item() const;

  void backward() const;

  // Graph construction hooks used by primitive implementations.
  struct Node;
  using BackwardFn = std::function<void(Node& self)>;
  static Tensor from_op(Matrix value, std::vector<Tensor> parents, BackwardFn fn);
  Node& node() const { return *node_; }

  struct Node {
    Matrix value;
    std::optional<Matrix> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    BackwardFn backward_fn;

    void accumulate(const Matrix& g);
    Node& parent(std::size_t i) { return *parents[i]; }
  };

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;
};

std::string shape_string(const Matrix& m);

}  // namespace comgrl
