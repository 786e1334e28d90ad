#include "pas/diffcore/param_store.hpp"

#include <cmath>

#include "pas/diffcore/rng.hpp"
#include "pas/error.hpp"

namespace pas {

std::uint64_t hash_key(std::uint64_t seed, const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ splitmix64(seed);
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Parameter& ParamStore::get_or_create(const std::string& key, Eigen::Index rows, Eigen::Index cols,
                                     Init init) {
  auto it = params_.find(key);
  if (it != params_.end()) {
    if (it->second.value.rows() != rows || it->second.value.cols() != cols) {
      throw ContractError("parameter '" + key + "' requested with a different shape");
    }
    return it->second;
  }
  Parameter p;
  p.value = Matrix::Zero(rows, cols);
  Rng rng(hash_key(seed_, key));
  switch (init) {
    case Init::kZeros:
      break;
    case Init::kGlorot: {
      const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
      for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = rng.uniform(-bound, bound);
      break;
    }
    case Init::kSmall:
      for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = rng.uniform(-1e-3, 1e-3);
      break;
  }
  return params_.emplace(key, std::move(p)).first->second;
}

Parameter& ParamStore::at(const std::string& key) {
  auto it = params_.find(key);
  if (it == params_.end()) throw ContractError("unknown parameter '" + key + "'");
  return it->second;
}

const Parameter& ParamStore::at(const std::string& key) const {
  auto it = params_.find(key);
  if (it == params_.end()) throw ContractError("unknown parameter '" + key + "'");
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& [_, p] : params_) p.zero_grad();
}

std::size_t ParamStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto& [_, p] : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

}  // namespace pas
