#include "pas/model_config.hpp"

#include "pas/diffcore/ops.hpp"

namespace pas {

Var activate(Var x, Activation a) {
  switch (a) {
    case Activation::kRelu: return relu(x);
    case Activation::kElu: return elu(x);
    case Activation::kIdentity: return x;
  }
  return x;
}

std::vector<bool> active_nodes(const Matrix& mask) {
  std::vector<bool> out(static_cast<std::size_t>(mask.rows()));
  for (Eigen::Index i = 0; i < mask.rows(); ++i) out[static_cast<std::size_t>(i)] = mask(i, 0) > 1e-12;
  return out;
}

}  // namespace pas
