#pragma once

#include <cstdint>
#include <string>

#include "pas/graphdata/graph.hpp"

namespace pas {

enum class SyntheticKind {
  // Erdos-Renyi(n in [15, 25], p = 0.2), features U(0,1)^4; label 1 iff the
  // channel-0 feature sum ranks in the upper half of the dataset.
  kFeatureSum,
  // n = 24, constant feature 1.0; class 0 has 2 communities, class 1 has 4;
  // intra-community edge probability 0.8, inter 0.05.
  kPlantedClusters,
};

struct SyntheticParams {
  int count = 200;
};

SyntheticKind parse_synthetic_kind(const std::string& s);
std::string to_string(SyntheticKind k);

Dataset gen_synthetic(SyntheticKind kind, const SyntheticParams& params, std::uint64_t seed);

}  // namespace pas
