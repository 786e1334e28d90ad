#include "pas/graphdata/batch.hpp"

#include "pas/error.hpp"

namespace pas {

Matrix GraphBatch::adjacency() const {
  Matrix a = Matrix::Zero(num_nodes(), num_nodes());
  for (std::size_t g = 0; g < blocks.size(); ++g) {
    const auto n = blocks[g].rows();
    a.block(offsets[g], offsets[g], n, n) = blocks[g];
  }
  return a;
}

Graph GraphBatch::extract(int g) const {
  if (g < 0 || g >= num_graphs()) throw ContractError("GraphBatch::extract: graph index out of range");
  Graph out;
  out.adj = blocks[static_cast<std::size_t>(g)];
  out.feat = block_features(g);
  out.label = labels[static_cast<std::size_t>(g)];
  return out;
}

GraphBatch make_batch(std::span<const Graph* const> graphs) {
  if (graphs.empty()) throw ContractError("make_batch: empty graph list");
  const Eigen::Index d = graphs.front()->feature_dim();
  Eigen::Index total = 0;
  for (const Graph* g : graphs) {
    if (g->feature_dim() != d) throw ContractError("make_batch: graphs disagree on feature dimension");
    total += g->num_nodes();
  }
  GraphBatch b;
  b.features.resize(total, d);
  b.mask = Matrix::Ones(total, 1);
  b.membership.reserve(static_cast<std::size_t>(total));
  b.offsets.push_back(0);
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const Graph& g = *graphs[i];
    b.features.middleRows(b.offsets.back(), g.num_nodes()) = g.feat;
    b.blocks.push_back(g.adj);
    b.labels.push_back(g.label);
    b.membership.insert(b.membership.end(), static_cast<std::size_t>(g.num_nodes()), static_cast<int>(i));
    b.offsets.push_back(b.offsets.back() + g.num_nodes());
  }
  return b;
}

GraphBatch make_batch(std::span<const Graph> graphs) {
  std::vector<const Graph*> ptrs;
  ptrs.reserve(graphs.size());
  for (const Graph& g : graphs) ptrs.push_back(&g);
  return make_batch(std::span<const Graph* const>(ptrs));
}

GraphBatch make_batch(const Dataset& ds, std::span<const int> indices) {
  std::vector<const Graph*> ptrs;
  ptrs.reserve(indices.size());
  for (int i : indices) {
    if (i < 0 || static_cast<std::size_t>(i) >= ds.graphs.size()) throw ContractError("make_batch: index out of range");
    ptrs.push_back(&ds.graphs[static_cast<std::size_t>(i)]);
  }
  return make_batch(std::span<const Graph* const>(ptrs));
}

}  // namespace pas
