#include "pas/diffcore/adam.hpp"

#include <cmath>

#include "pas/error.hpp"

namespace pas {

void adam_step(ParamStore& params, AdamState& state) {
  const AdamConfig& c = state.config;
  if (!(c.lr > 0.0)) throw ContractError("adam_step: learning rate must be positive");
  ++state.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (auto& [key, p] : params) {
    auto [it, inserted] = state.moments.try_emplace(key);
    auto& mom = it->second;
    if (inserted) {
      mom.m = Matrix::Zero(p.value.rows(), p.value.cols());
      mom.v = Matrix::Zero(p.value.rows(), p.value.cols());
    } else if (mom.m.rows() != p.value.rows() || mom.m.cols() != p.value.cols()) {
      throw ContractError("adam_step: moment shape mismatch for '" + key + "'");
    }
    if (p.grad.size() == 0) {
      mom.m *= c.beta1;
      mom.v *= c.beta2;
    } else {
      if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) {
        throw ContractError("adam_step: gradient shape mismatch for '" + key + "'");
      }
      mom.m = c.beta1 * mom.m + (1.0 - c.beta1) * p.grad;
      mom.v = c.beta2 * mom.v + (1.0 - c.beta2) * p.grad.cwiseProduct(p.grad);
    }
    p.value.array() -= c.lr * (mom.m.array() / bc1) / ((mom.v.array() / bc2).sqrt() + c.eps);
  }
}

}  // namespace pas
