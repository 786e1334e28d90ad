#include "pas/supernet/model.hpp"

#include "pas/aggops.hpp"
#include "pas/diffcore/ops.hpp"
#include "pas/error.hpp"
#include "pas/poolops.hpp"
#include "pas/readmerge.hpp"

namespace pas {

std::string embed_prefix() { return "embed"; }
std::string agg_prefix(int layer, AggKind k) { return "layer" + std::to_string(layer) + "/agg/" + to_string(k); }
std::string pool_prefix(int layer, PoolKind k) { return "layer" + std::to_string(layer) + "/pool/" + to_string(k); }
std::string readout_prefix(int position, ReadoutKind k) {
  return "readout" + std::to_string(position) + "/" + to_string(k);
}
std::string merge_prefix(MergeKind k) { return "merge/" + to_string(k); }
std::string classifier_prefix() { return "classifier"; }

MixedGraph embed_graph(Tape& tape, const Matrix& adj, const Matrix& feat, ParamStore& params, const ModelConfig& cfg) {
  if (feat.cols() != cfg.in_dim) throw ContractError("input features do not match the configured input dimension");
  Var w = tape.param(params.get_or_create(embed_prefix() + "/W", cfg.in_dim, cfg.hidden, Init::kGlorot));
  Var b = tape.param(params.get_or_create(embed_prefix() + "/b", 1, cfg.hidden, Init::kZeros));
  MixedGraph g;
  g.adj = tape.constant(adj);
  g.feat = add_row(matmul(tape.constant(feat), w), b);
  g.mask = tape.constant(Matrix::Ones(adj.rows(), 1));
  return g;
}

namespace {

// Indices of the terms to evaluate, plus whether the single surviving term
// can be returned without scaling.
struct Terms {
  std::vector<int> active;
  bool passthrough = false;
};

Terms select_terms(const Var& c, bool prune) {
  Terms t;
  const Matrix& w = c.value();
  for (int i = 0; i < w.cols(); ++i) {
    if (!prune || w(0, i) != 0.0) t.active.push_back(i);
  }
  t.passthrough = prune && t.active.size() == 1 && w(0, t.active[0]) == 1.0 && !c.tape()->needs_grad(c);
  return t;
}

Var weighted_sum(const std::vector<std::pair<int, Var>>& terms, const Var& c) {
  Var acc;
  for (const auto& [i, v] : terms) {
    Var term = scale_by(v, slice_cols(c, i, 1));
    acc = acc.valid() ? add(acc, term) : term;
  }
  return acc;
}

void check_weights(const Var& c, int expected, const char* what) {
  if (c.rows() != 1 || c.cols() != expected) {
    throw ContractError(std::string(what) + ": weight row must have " + std::to_string(expected) + " entries");
  }
}

}  // namespace

Var mixed_aggregation(const MixedGraph& g, Var c, ParamStore& params, int layer, const ModelConfig& cfg, bool prune) {
  check_weights(c, kNumAggKinds, "mixed_aggregation");
  const Terms t = select_terms(c, prune);
  std::vector<std::pair<int, Var>> outs;
  for (int i : t.active) {
    const auto k = static_cast<AggKind>(i);
    outs.emplace_back(i, aggregate(k, g, params, agg_prefix(layer, k), cfg));
  }
  if (t.passthrough) return outs.front().second;
  return weighted_sum(outs, c);
}

MixedGraph mixed_pooling(const MixedGraph& g, Var c, ParamStore& params, int layer, const ModelConfig& cfg, bool prune) {
  check_weights(c, kNumPoolKinds, "mixed_pooling");
  const Terms t = select_terms(c, prune);
  std::vector<std::pair<int, Var>> adj, feat, mask;
  for (int i : t.active) {
    const auto k = static_cast<PoolKind>(i);
    PoolResult r = pool(k, PoolMode::kMasked, g, params, pool_prefix(layer, k), cfg);
    adj.emplace_back(i, r.graph.adj);
    feat.emplace_back(i, r.graph.feat);
    mask.emplace_back(i, r.graph.mask);
  }
  if (t.passthrough) return {adj.front().second, feat.front().second, mask.front().second};
  return {weighted_sum(adj, c), weighted_sum(feat, c), weighted_sum(mask, c)};
}

Var mixed_readout(const MixedGraph& g, Var c, ParamStore& params, int position, const ModelConfig& cfg, bool prune) {
  check_weights(c, kNumReadoutKinds, "mixed_readout");
  const Terms t = select_terms(c, prune);
  std::vector<std::pair<int, Var>> outs;
  for (int i : t.active) {
    const auto k = static_cast<ReadoutKind>(i);
    outs.emplace_back(i, readout(k, g, params, readout_prefix(position, k), cfg));
  }
  if (t.passthrough) return outs.front().second;
  return weighted_sum(outs, c);
}

Var mixed_merge(const std::vector<Var>& zs, Var c, ParamStore& params, const ModelConfig& cfg, bool prune) {
  check_weights(c, kNumMergeKinds, "mixed_merge");
  const Terms t = select_terms(c, prune);
  std::vector<std::pair<int, Var>> outs;
  for (int i : t.active) {
    const auto k = static_cast<MergeKind>(i);
    outs.emplace_back(i, merge(k, zs, params, merge_prefix(k), cfg));
  }
  if (t.passthrough) return outs.front().second;
  return weighted_sum(outs, c);
}

std::vector<Var> site_weights(Tape& tape, ArchParams& arch, Rng& rng, NoiseMode noise) {
  std::vector<Var> out;
  for (const Site& s : arch.sites()) {
    const int k = num_ops(s.type);
    if (auto p = arch.pins().pinned(s)) {
      Matrix onehot = Matrix::Zero(1, k);
      onehot(0, *p) = 1.0;
      out.push_back(tape.constant(onehot));
      continue;
    }
    const Matrix g = noise == NoiseMode::kGumbel ? gumbel_noise(rng, k) : Matrix::Zero(1, k);
    out.push_back(relax_weights(tape.param(arch.logit(s)), arch.tau(), g));
  }
  return out;
}

Var supernet_forward(Tape& tape, const GraphBatch& batch, ArchParams& arch, ParamStore& weights,
                     const ModelConfig& cfg, Rng& rng, const SupernetOptions& opts, ForwardTrace* trace) {
  if (arch.layers() != cfg.layers) throw ContractError("supernet_forward: layer count mismatch");
  const std::vector<Var> c = site_weights(tape, arch, rng, opts.noise);
  // Layout of site_weights: agg0, pool0, agg1, pool1, ..., readout0..L, merge.
  const int L = cfg.layers;
  auto agg_w = [&](int l) { return c[static_cast<std::size_t>(2 * l)]; };
  auto pool_w = [&](int l) { return c[static_cast<std::size_t>(2 * l + 1)]; };
  auto read_w = [&](int p) { return c[static_cast<std::size_t>(2 * L + p)]; };
  const Var merge_w = c.back();
  const bool prune = opts.prune_zero_weights;

  if (trace) trace->graphs.assign(static_cast<std::size_t>(batch.num_graphs()), {});
  std::vector<Var> logits;
  for (int b = 0; b < batch.num_graphs(); ++b) {
    MixedGraph g = embed_graph(tape, batch.blocks[static_cast<std::size_t>(b)], batch.block_features(b), weights, cfg);
    if (trace) trace->graphs[static_cast<std::size_t>(b)].push_back(g);
    std::vector<Var> zs;
    if (!cfg.readout0_after_aggregation) zs.push_back(mixed_readout(g, read_w(0), weights, 0, cfg, prune));
    for (int l = 0; l < L; ++l) {
      MixedGraph ga{g.adj, mixed_aggregation(g, agg_w(l), weights, l, cfg, prune), g.mask};
      if (l == 0 && cfg.readout0_after_aggregation) zs.push_back(mixed_readout(ga, read_w(0), weights, 0, cfg, prune));
      g = mixed_pooling(ga, pool_w(l), weights, l, cfg, prune);
      if (trace) {
        trace->graphs[static_cast<std::size_t>(b)].push_back(ga);
        trace->graphs[static_cast<std::size_t>(b)].push_back(g);
      }
      zs.push_back(mixed_readout(g, read_w(l + 1), weights, l + 1, cfg, prune));
    }
    Var zf = mixed_merge(zs, merge_w, weights, cfg, prune);
    logits.push_back(classify(zf, weights, classifier_prefix(), cfg));
  }
  Var out = concat_rows(logits);
  if (!out.value().allFinite()) throw NumericError("supernet_forward produced non-finite logits");
  return out;
}

Var discrete_forward(Tape& tape, const GraphBatch& batch, const DerivedArch& arch, ParamStore& weights,
                     const ModelConfig& cfg) {
  arch.validate();
  if (arch.num_layers() != cfg.layers) throw ContractError("discrete_forward: layer count mismatch");
  std::vector<Var> logits;
  for (int b = 0; b < batch.num_graphs(); ++b) {
    MixedGraph g = embed_graph(tape, batch.blocks[static_cast<std::size_t>(b)], batch.block_features(b), weights, cfg);
    std::vector<Var> zs;
    if (!cfg.readout0_after_aggregation) {
      zs.push_back(readout(arch.readouts[0], g, weights, readout_prefix(0, arch.readouts[0]), cfg));
    }
    for (int l = 0; l < cfg.layers; ++l) {
      const auto& layer = arch.layers[static_cast<std::size_t>(l)];
      MixedGraph ga{g.adj, aggregate(layer.agg, g, weights, agg_prefix(l, layer.agg), cfg), g.mask};
      if (l == 0 && cfg.readout0_after_aggregation) {
        zs.push_back(readout(arch.readouts[0], ga, weights, readout_prefix(0, arch.readouts[0]), cfg));
      }
      g = pool(layer.pool, PoolMode::kDiscrete, ga, weights, pool_prefix(l, layer.pool), cfg).graph;
      const ReadoutKind r = arch.readouts[static_cast<std::size_t>(l) + 1];
      zs.push_back(readout(r, g, weights, readout_prefix(l + 1, r), cfg));
    }
    Var zf = merge(arch.merge, zs, weights, merge_prefix(arch.merge), cfg);
    logits.push_back(classify(zf, weights, classifier_prefix(), cfg));
  }
  Var out = concat_rows(logits);
  if (!out.value().allFinite()) throw NumericError("discrete_forward produced non-finite logits");
  return out;
}

}  // namespace pas
