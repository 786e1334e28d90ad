#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "pas/diffcore/tensor.hpp"

namespace pas {

struct Parameter;
class Tape;

// Lightweight handle to a node on a Tape. Copyable; does not own the value.
class Var {
 public:
  Var() = default;

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  // Value of a 1x1 node.
  double scalar() const;

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Dynamic reverse-mode tape. A fresh tape is built for every forward pass;
// backward() walks it once in reverse creation order.
class Tape {
 public:
  // Receives the upstream gradient (same shape as the node value) and
  // pushes contributions into the node's inputs via accumulate().
  using Backward = std::function<void(Tape&, const Matrix& upstream)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  // A leaf whose gradient is tracked but not written anywhere else.
  Var leaf(Matrix value);
  // Leaf bound to a Parameter; backward() adds the node gradient into
  // param.grad. Repeated calls with the same parameter return the same node.
  Var param(Parameter& p);

  // Creates an interior node. The backward closure is kept only when at
  // least one input requires a gradient.
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward fn);
  Var record(Matrix value, const std::vector<Var>& inputs, Backward fn);

  void accumulate(const Var& v, const Matrix& g);
  template <typename Expr>
  void accumulate_expr(const Var& v, const Expr& g) {
    Node& n = nodes_[v.id_];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

  bool needs_grad(const Var& v) const { return nodes_[v.id_].needs_grad; }
  const Matrix& value(const Var& v) const { return nodes_[v.id_].value; }
  // Gradient of v after backward(); zeros if nothing reached it.
  Matrix grad(const Var& v) const;

  // Seeds d(root)/d(root) = 1 and propagates. root must be 1x1.
  void backward(const Var& root);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_nodes_;
};

namespace testing {
// Test hook: when enabled, tanh's backward pass is deliberately wrong so
// gradient-check tooling can be shown to fail loudly.
void set_corrupt_tanh_gradient(bool enabled);
bool corrupt_tanh_gradient();
}  // namespace testing

}  // namespace pas
