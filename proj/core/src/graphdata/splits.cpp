#include "pas/graphdata/splits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pas/diffcore/rng.hpp"
#include "pas/error.hpp"

namespace pas {
namespace {

std::vector<std::vector<int>> by_class(const Dataset& ds, std::span<const int> indices) {
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(ds.num_classes));
  if (indices.empty()) {
    for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
      groups[static_cast<std::size_t>(ds.graphs[i].label)].push_back(static_cast<int>(i));
    }
  } else {
    for (int i : indices) groups[static_cast<std::size_t>(ds.graphs[static_cast<std::size_t>(i)].label)].push_back(i);
  }
  return groups;
}

}  // namespace

std::vector<Fold> stratified_kfold(const Dataset& ds, int k, std::uint64_t seed) {
  auto groups = by_class(ds, {});
  int min_count = std::numeric_limits<int>::max();
  for (const auto& g : groups) min_count = std::min(min_count, static_cast<int>(g.size()));
  if (k < 2) throw ContractError("stratified_kfold: k must be at least 2");
  if (k > min_count) {
    throw ContractError("stratified_kfold: k=" + std::to_string(k) + " exceeds the smallest class count " +
                        std::to_string(min_count));
  }
  Rng rng(seed);
  std::vector<std::vector<int>> test(static_cast<std::size_t>(k));
  std::size_t next = 0;
  for (auto& g : groups) {
    rng.shuffle(g);
    for (int idx : g) {
      test[next].push_back(idx);
      next = (next + 1) % static_cast<std::size_t>(k);
    }
  }
  std::vector<Fold> folds(static_cast<std::size_t>(k));
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::sort(test[f].begin(), test[f].end());
    folds[f].test = test[f];
    for (std::size_t o = 0; o < folds.size(); ++o) {
      if (o != f) folds[f].train.insert(folds[f].train.end(), test[o].begin(), test[o].end());
    }
    std::sort(folds[f].train.begin(), folds[f].train.end());
  }
  return folds;
}

Split stratified_split(const Dataset& ds, std::span<const int> indices, std::array<double, 3> fractions,
                       std::uint64_t seed) {
  for (double f : fractions) {
    if (f < 0.0) throw ContractError("stratified_split: fractions must be non-negative");
  }
  if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9) {
    throw ContractError("stratified_split: fractions must sum to 1");
  }
  auto groups = by_class(ds, indices);
  Rng rng(seed);
  Split s;
  for (auto& g : groups) {
    rng.shuffle(g);
    const auto n = static_cast<double>(g.size());
    auto n_val = static_cast<std::size_t>(std::llround(fractions[1] * n));
    auto n_test = static_cast<std::size_t>(std::llround(fractions[2] * n));
    n_val = std::min(n_val, g.size());
    n_test = std::min(n_test, g.size() - n_val);
    std::size_t i = 0;
    for (; i < n_val; ++i) s.val.push_back(g[i]);
    for (; i < n_val + n_test; ++i) s.test.push_back(g[i]);
    for (; i < g.size(); ++i) s.train.push_back(g[i]);
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

}  // namespace pas
