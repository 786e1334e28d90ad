#include "pas/diffcore/tape.hpp"

#include <atomic>

#include "pas/diffcore/param_store.hpp"
#include "pas/error.hpp"

namespace pas {

const Matrix& Var::value() const { return tape_->value(*this); }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw ContractError("Var::scalar on a non-1x1 node");
  return v(0, 0);
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::leaf(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = true;
  return push(std::move(n));
}

Var Tape::param(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var(this, it->second);
  Node n;
  n.value = p.value;
  n.param = &p;
  n.needs_grad = true;
  Var v = push(std::move(n));
  param_nodes_.emplace(&p, v.id_);
  return v;
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, Backward fn) {
  Node n;
  n.value = std::move(value);
  for (const Var& in : inputs) {
    if (nodes_[in.id_].needs_grad) {
      n.needs_grad = true;
      break;
    }
  }
  if (n.needs_grad) n.backward = std::move(fn);
  return push(std::move(n));
}

Var Tape::record(Matrix value, const std::vector<Var>& inputs, Backward fn) {
  Node n;
  n.value = std::move(value);
  for (const Var& in : inputs) {
    if (nodes_[in.id_].needs_grad) {
      n.needs_grad = true;
      break;
    }
  }
  if (n.needs_grad) n.backward = std::move(fn);
  return push(std::move(n));
}

void Tape::accumulate(const Var& v, const Matrix& g) { accumulate_expr(v, g); }

Matrix Tape::grad(const Var& v) const {
  const Node& n = nodes_[v.id_];
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(const Var& root) {
  if (root.tape_ != this) throw ContractError("backward: root belongs to another tape");
  if (nodes_[root.id_].value.size() != 1) throw ContractError("backward: root must be a 1x1 scalar");
  if (!nodes_[root.id_].needs_grad) return;
  accumulate(root, Matrix::Ones(1, 1));
  for (int i = root.id_; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, n.grad);
    if (n.param != nullptr) {
      if (n.param->grad.size() == 0) {
        n.param->grad = n.grad;
      } else {
        n.param->grad += n.grad;
      }
    }
  }
}

namespace testing {
namespace {
std::atomic<bool> g_corrupt_tanh{false};
}
void set_corrupt_tanh_gradient(bool enabled) { g_corrupt_tanh.store(enabled); }
bool corrupt_tanh_gradient() { return g_corrupt_tanh.load(std::memory_order_relaxed); }
}  // namespace testing

}  // namespace pas
