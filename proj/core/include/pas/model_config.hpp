#pragma once

#include "pas/diffcore/tape.hpp"
#include "pas/kinds.hpp"

namespace pas {

// Shape and operator hyperparameters shared by the supernet and by derived
// architectures.
struct ModelConfig {
  Eigen::Index in_dim = 1;
  Eigen::Index hidden = 32;
  int num_classes = 2;
  int layers = 2;
  double pool_ratio = 0.5;
  Activation activation = Activation::kRelu;
  double gat_slope = 0.2;
  Eigen::Index sort_k = 10;
  int set2set_steps = 2;
  // Readout position 0 reads the embedded input graph; when true it reads
  // the output of the first aggregation instead.
  bool readout0_after_aggregation = false;
};

// A graph on the tape: adjacency (N x N), features (N x d) and soft node
// mask (N x 1). Rows/columns of nodes whose mask is 0 are exactly 0.
struct MixedGraph {
  Var adj;
  Var feat;
  Var mask;

  Eigen::Index num_nodes() const { return feat.rows(); }
};

Var activate(Var x, Activation a);

// Nodes whose mask exceeds 1e-12.
std::vector<bool> active_nodes(const Matrix& mask);

}  // namespace pas
