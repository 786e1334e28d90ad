#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pas/graphdata/graph.hpp"

namespace pas {

struct Fold {
  std::vector<int> train;
  std::vector<int> test;
};

// k stratified folds over all graph indices. Each class is shuffled with the
// seed and dealt round-robin across folds, continuing the rotation from the
// previous class, so every fold holds floor or ceil of n_c / k graphs of
// class c. Requires 2 <= k <= smallest class count. Index lists are sorted.
std::vector<Fold> stratified_kfold(const Dataset& ds, int k, std::uint64_t seed);

struct Split {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

// Stratified train/val/test split of `indices` (all graphs when empty) with
// the given fractions (must sum to 1). Per class, the val and test counts are
// rounded from their fractions and the remainder goes to training.
Split stratified_split(const Dataset& ds, std::span<const int> indices, std::array<double, 3> fractions,
                       std::uint64_t seed);

}  // namespace pas
