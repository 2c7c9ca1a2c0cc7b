#include "comgrl/tensor.hpp"

#include <unordered_set>

namespace comgrl {

std::string shape_string(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Tensor::Tensor() : node_(std::make_shared<Node>()) {}

Tensor Tensor::constant(Matrix value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Tensor(std::move(node));
}

Tensor Tensor::parameter(Matrix value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  return Tensor(std::move(node));
}

Tensor Tensor::from_op(Matrix value, std::vector<Tensor> parents, BackwardFn fn) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  for (auto& p : parents) {
    node->requires_grad = node->requires_grad || p.requires_grad();
    node->parents.push_back(p.node_);
  }
  // Nodes that cannot reach a parameter never need their backward rule.
  if (node->requires_grad) {
    node->backward_fn = std::move(fn);
  } else {
    node->parents.clear();
  }
  return Tensor(std::move(node));
}

const Matrix& Tensor::grad() const {
  if (!node_->grad) {
    throw std::logic_error("Tensor::grad: no gradient has been accumulated");
  }
  return *node_->grad;
}

double Tensor::item() const {
  if (rows() != 1 || cols() != 1) {
    throw ShapeError("item: expected a 1x1 tensor, got " + shape_string(value()));
  }
  return node_->value(0, 0);
}

void Tensor::Node::accumulate(const Matrix& g) {
  if (!requires_grad) return;
  if (grad) {
    *grad += g;
  } else {
    grad = g;
  }
}

void Tensor::backward() const {
  if (rows() != 1 || cols() != 1) {
    throw ShapeError("backward: loss must be 1x1, got " + shape_string(value()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS yields a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) {
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (!n->parents.empty()) n->grad.reset();
  }
  node_->accumulate(Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->grad) n->backward_fn(*n);
  }
}

}  // namespace comgrl
