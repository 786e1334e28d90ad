#pragma once

#include <string>
#include <vector>

#include "pas/diffcore/rng.hpp"
#include "pas/graphdata/batch.hpp"
#include "pas/model_config.hpp"
#include "pas/supernet/arch.hpp"

namespace pas {

// Parameter key prefixes shared by the supernet and derived architectures,
// so both can run against one ParamStore.
std::string embed_prefix();
std::string agg_prefix(int layer, AggKind k);
std::string pool_prefix(int layer, PoolKind k);
std::string readout_prefix(int position, ReadoutKind k);
std::string merge_prefix(MergeKind k);
std::string classifier_prefix();

// Linear input embedding d_in -> hidden applied to raw node features.
MixedGraph embed_graph(Tape& tape, const Matrix& adj, const Matrix& feat, ParamStore& params, const ModelConfig& cfg);

// Mixed operations over a weight row c (1 x |O|). With prune set, terms
// whose weight is exactly 0 are skipped; a single constant weight of
// exactly 1 returns the operation output unchanged.
Var mixed_aggregation(const MixedGraph& g, Var c, ParamStore& params, int layer, const ModelConfig& cfg,
                      bool prune = true);
// Coarsening-strategy pooling: every kind pools in shape-preserving mode
// and the adjacencies, features and masks are summed with weights c.
MixedGraph mixed_pooling(const MixedGraph& g, Var c, ParamStore& params, int layer, const ModelConfig& cfg,
                         bool prune = true);
Var mixed_readout(const MixedGraph& g, Var c, ParamStore& params, int position, const ModelConfig& cfg,
                  bool prune = true);
Var mixed_merge(const std::vector<Var>& zs, Var c, ParamStore& params, const ModelConfig& cfg, bool prune = true);

enum class NoiseMode { kGumbel, kNone };

struct SupernetOptions {
  NoiseMode noise = NoiseMode::kGumbel;
  bool prune_zero_weights = true;
};

// Intermediate graphs of a forward pass, per batch graph:
// [G^0, G^1a, G^1, G^2a, G^2, ...].
struct ForwardTrace {
  std::vector<std::vector<MixedGraph>> graphs;
};

// Relaxed weights for every site (pinned sites get an exact one-hot
// constant). Noise is drawn per unpinned site in site order.
std::vector<Var> site_weights(Tape& tape, ArchParams& arch, Rng& rng, NoiseMode noise);

// Relaxed forward pass; returns B x C logits.
Var supernet_forward(Tape& tape, const GraphBatch& batch, ArchParams& arch, ParamStore& weights,
                     const ModelConfig& cfg, Rng& rng, const SupernetOptions& opts = {},
                     ForwardTrace* trace = nullptr);

// Forward pass of one concrete architecture, pooling by actually shrinking
// each graph; returns B x C logits.
Var discrete_forward(Tape& tape, const GraphBatch& batch, const DerivedArch& arch, ParamStore& weights,
                     const ModelConfig& cfg);

}  // namespace pas
