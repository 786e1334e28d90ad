#pragma once

#include <string>
#include <vector>

#include "pas/diffcore/tensor.hpp"

namespace pas {

// One undirected, possibly edge-weighted graph with a class label.
struct Graph {
  Matrix adj;   // n x n, zero diagonal
  Matrix feat;  // n x d_in
  int label = 0;

  Eigen::Index num_nodes() const { return adj.rows(); }
  Eigen::Index feature_dim() const { return feat.cols(); }
  std::size_t num_edges() const;  // undirected edges (nonzero upper-triangle entries)

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.label == b.label && a.adj == b.adj && a.feat == b.feat;
  }
};

struct Dataset {
  std::string name;
  std::vector<Graph> graphs;
  int num_classes = 0;
  Eigen::Index feature_dim = 0;

  std::size_t size() const { return graphs.size(); }
  std::vector<int> labels() const;
  std::vector<int> class_counts() const;
};

// Throws DataError if a graph breaks the Graph invariants (square adjacency,
// zero diagonal, finite entries, at least one node, matching feature rows).
void validate_graph(const Graph& g, bool require_symmetric = true);
// Validates every graph plus shared feature dimension and label range.
void validate_dataset(const Dataset& ds);

}  // namespace pas
