#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "pas/diffcore/tensor.hpp"

namespace pas {

std::uint64_t splitmix64(std::uint64_t x);

// Seeded random stream. Bit-level output is fixed across platforms: only the
// raw mt19937_64 sequence is used, never std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }

  // Child stream determined by (seed, stream) alone, independent of how
  // many values have been drawn from this stream.
  Rng split(std::uint64_t stream) const { return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x9E37))); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Standard Gumbel samples g = -log(-log u), u clamped to [1e-12, 1 - 1e-12].
// Returned as a 1 x count row.
Matrix gumbel_noise(Rng& rng, Eigen::Index count);
double gumbel_from_uniform(double u);

}  // namespace pas
