#include "pas/graphdata/synthetic.hpp"

#include <algorithm>
#include <numeric>

#include "pas/diffcore/rng.hpp"
#include "pas/error.hpp"

namespace pas {

SyntheticKind parse_synthetic_kind(const std::string& s) {
  if (s == "feature-sum") return SyntheticKind::kFeatureSum;
  if (s == "planted-clusters") return SyntheticKind::kPlantedClusters;
  throw ContractError("unknown synthetic dataset kind '" + s + "'");
}

std::string to_string(SyntheticKind k) {
  return k == SyntheticKind::kFeatureSum ? "feature-sum" : "planted-clusters";
}

namespace {

void add_edge(Matrix& adj, Eigen::Index i, Eigen::Index j) {
  adj(i, j) = 1.0;
  adj(j, i) = 1.0;
}

Dataset feature_sum(int count, Rng& rng) {
  Dataset ds;
  ds.name = "feature-sum";
  ds.num_classes = 2;
  ds.feature_dim = 4;
  std::vector<double> sums;
  for (int g = 0; g < count; ++g) {
    const auto n = static_cast<Eigen::Index>(15 + rng.below(11));
    Graph gr;
    gr.adj = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (rng.bernoulli(0.2)) add_edge(gr.adj, i, j);
      }
    }
    gr.feat.resize(n, 4);
    for (Eigen::Index i = 0; i < gr.feat.size(); ++i) gr.feat.data()[i] = rng.uniform();
    sums.push_back(gr.feat.col(0).sum());
    ds.graphs.push_back(std::move(gr));
  }
  // Rank split at the median: the upper half (ties by index) is class 1.
  std::vector<int> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sums[a] < sums[b]; });
  for (int r = 0; r < count; ++r) {
    ds.graphs[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])].label = r >= count - count / 2 ? 1 : 0;
  }
  return ds;
}

Dataset planted_clusters(int count, Rng& rng) {
  Dataset ds;
  ds.name = "planted-clusters";
  ds.num_classes = 2;
  ds.feature_dim = 1;
  constexpr Eigen::Index n = 24;
  for (int g = 0; g < count; ++g) {
    const int label = g % 2;
    const Eigen::Index communities = label == 0 ? 2 : 4;
    const Eigen::Index size = n / communities;
    Graph gr;
    gr.label = label;
    gr.adj = Matrix::Zero(n, n);
    gr.feat = Matrix::Ones(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const bool same = i / size == j / size;
        if (rng.bernoulli(same ? 0.8 : 0.05)) add_edge(gr.adj, i, j);
      }
    }
    ds.graphs.push_back(std::move(gr));
  }
  return ds;
}

}  // namespace

Dataset gen_synthetic(SyntheticKind kind, const SyntheticParams& params, std::uint64_t seed) {
  if (params.count < 2) throw ContractError("gen_synthetic: count must be at least 2");
  Rng rng(seed);
  Dataset ds = kind == SyntheticKind::kFeatureSum ? feature_sum(params.count, rng) : planted_clusters(params.count, rng);
  validate_dataset(ds);
  return ds;
}

}  // namespace pas
