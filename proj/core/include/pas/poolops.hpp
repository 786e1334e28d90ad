#pragma once

#include <span>
#include <string>
#include <vector>

#include "pas/diffcore/param_store.hpp"
#include "pas/model_config.hpp"

namespace pas {

// Node scores S (N x 1) for every kind except NONE:
//   TOPKPOOL  h . p / ||p||
//   SAGPOOL   GCN-normalised convolution to one channel
//   ASAP      sigmoid(h_v W1 + sum_u A_vu (h_v W2 - h_u W3))   (LEConv fitness)
//   HOPPOOL_t sum_{i<=t} sum_{v in N~(u)} (A^i)_uv             (constant)
//   MLPPOOL   sigmoid(act(h W0 + b0) W1 + b1)
//   GCPOOL    GRAPHCONV to one channel
//   GAPPOOL   1/2 w . sum_{v in N~(u)} (h_u - h_v)^2
// N~(u) = {v : A_uv > 0} U {u}. Throws ContractError for NONE.
Var node_scores(PoolKind kind, const MixedGraph& g, ParamStore& params, const std::string& prefix,
                const ModelConfig& cfg);

// Top-k node selection for one graph. Candidates are nodes with mask
// > 1e-12; k = max(1, ceil(ratio * |candidates|)). Highest scores win, ties
// go to the lower node index, and the result is in ascending node order.
std::vector<int> top_k_select(const Matrix& scores, const Matrix& mask, double ratio);
// Per-graph selection over a block-diagonal node set; returned indices are
// global node ids.
std::vector<std::vector<int>> top_k_select(const Matrix& scores, const Matrix& mask, double ratio,
                                           std::span<const int> membership);

struct PoolResult {
  MixedGraph graph;
  std::vector<int> idx;
};

// Shrinks g to the rows/columns in idx. Parameterized kinds gate the kept
// features by tanh(score); HOPPOOL keeps them as they are; NONE returns g.
PoolResult pool_discrete(PoolKind kind, const MixedGraph& g, const std::vector<int>& idx, const Var& scores);
// Shape-preserving variant: same node count as g, with every feature row,
// adjacency entry and mask entry outside idx set to exactly 0.
PoolResult pool_masked(PoolKind kind, const MixedGraph& g, const std::vector<int>& idx, const Var& scores);

enum class PoolMode { kDiscrete, kMasked };

// Scores, selects and pools in one call.
PoolResult pool(PoolKind kind, PoolMode mode, const MixedGraph& g, ParamStore& params, const std::string& prefix,
                const ModelConfig& cfg);

}  // namespace pas
