#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "pas/diffcore/tensor.hpp"

namespace pas {

struct Parameter {
  Matrix value;
  // Empty until the first backward pass touches it; treated as zero.
  Matrix grad;

  void zero_grad() { grad = Matrix::Zero(value.rows(), value.cols()); }
};

enum class Init {
  kZeros,
  // U(-b, b) with b = sqrt(6 / (fan_in + fan_out)).
  kGlorot,
  // U(-1e-3, 1e-3); architecture logits.
  kSmall,
};

// Keyed collection of trainable matrices. Initial values depend only on
// (seed, key), so two stores built with the same seed agree on every key
// they share regardless of creation order.
class ParamStore {
 public:
  explicit ParamStore(std::uint64_t seed = 0) : seed_(seed) {}

  // Returns the existing parameter if present (shape must match).
  Parameter& get_or_create(const std::string& key, Eigen::Index rows, Eigen::Index cols,
                           Init init = Init::kGlorot);
  Parameter& at(const std::string& key);
  const Parameter& at(const std::string& key) const;
  bool contains(const std::string& key) const { return params_.count(key) != 0; }

  void zero_grad();
  std::size_t size() const { return params_.size(); }
  std::size_t num_scalars() const;
  std::uint64_t seed() const { return seed_; }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::uint64_t seed_;
  std::map<std::string, Parameter> params_;
};

// FNV-1a over the bytes of s, mixed with a seed.
std::uint64_t hash_key(std::uint64_t seed, const std::string& s);

}  // namespace pas
