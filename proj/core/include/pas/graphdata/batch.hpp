#pragma once

#include <span>
#include <vector>

#include "pas/graphdata/graph.hpp"

namespace pas {

// Block-diagonal stack of graphs. Adjacency is kept per block; adjacency()
// materializes the dense N_B x N_B matrix when needed.
struct GraphBatch {
  std::vector<Matrix> blocks;
  std::vector<Eigen::Index> offsets;  // size num_graphs + 1
  Matrix features;                    // N_B x d
  std::vector<int> membership;        // graph index per node, non-decreasing
  Matrix mask;                        // N_B x 1, entries in [0, 1]
  std::vector<int> labels;

  int num_graphs() const { return static_cast<int>(blocks.size()); }
  Eigen::Index num_nodes() const { return features.rows(); }
  Eigen::Index feature_dim() const { return features.cols(); }

  Matrix adjacency() const;
  // Node feature rows belonging to graph g.
  auto block_features(int g) const {
    return features.middleRows(offsets[static_cast<std::size_t>(g)], blocks[static_cast<std::size_t>(g)].rows());
  }
  Graph extract(int g) const;
};

GraphBatch make_batch(std::span<const Graph* const> graphs);
GraphBatch make_batch(std::span<const Graph> graphs);
GraphBatch make_batch(const Dataset& ds, std::span<const int> indices);

}  // namespace pas
