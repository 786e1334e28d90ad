#pragma once

#include <cmath>
#include <vector>

#include "pas/graphdata/batch.hpp"
#include "pas/supernet/model.hpp"
#include "test_support.hpp"

namespace pas::test {

// Largest |supernet - discrete| logit difference for one architecture, with
// the supernet pinned to exact one-hot weights and computing every
// operation (nothing pruned).
inline double one_hot_gap(const GraphBatch& batch, const DerivedArch& arch, ParamStore& weights,
                          const ModelConfig& cfg) {
  ArchParams pinned(cfg.layers, 0.2, 0, pin_all(arch));
  Rng rng(0);
  SupernetOptions opts;
  opts.noise = NoiseMode::kNone;
  opts.prune_zero_weights = false;
  Tape ts;
  const Matrix mixed = supernet_forward(ts, batch, pinned, weights, cfg, rng, opts).value();
  Tape td;
  const Matrix disc = discrete_forward(td, batch, arch, weights, cfg).value();
  return (mixed - disc).cwiseAbs().maxCoeff();
}

// Counts violations of mask closure over every traced graph: nodes whose
// mask is exactly 0 must have all-zero feature rows and adjacency rows and
// columns. zero_nodes receives the number of zero-mask nodes inspected.
inline int mask_closure_violations(const ForwardTrace& trace, int& zero_nodes) {
  int bad = 0;
  for (const auto& per_graph : trace.graphs) {
    for (const MixedGraph& g : per_graph) {
      const Matrix& m = g.mask.value();
      const Matrix& h = g.feat.value();
      const Matrix& a = g.adj.value();
      for (Eigen::Index v = 0; v < m.rows(); ++v) {
        if (m(v, 0) < 0.0 || m(v, 0) > 1.0 + 1e-12) ++bad;
        if (m(v, 0) != 0.0) continue;
        ++zero_nodes;
        for (Eigen::Index j = 0; j < h.cols(); ++j) bad += h(v, j) != 0.0;
        for (Eigen::Index j = 0; j < a.cols(); ++j) bad += (a(v, j) != 0.0) + (a(j, v) != 0.0);
      }
    }
  }
  return bad;
}

// Random batch of `count` graphs with N in [min_n, max_n].
inline GraphBatch random_batch(Rng& rng, int count, Eigen::Index d, Eigen::Index min_n, Eigen::Index max_n) {
  std::vector<Graph> gs;
  for (int i = 0; i < count; ++i) {
    const auto n = min_n + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(max_n - min_n + 1)));
    gs.push_back(random_graph(rng, n, d, 0.3, i % 2));
  }
  return make_batch(gs);
}

}  // namespace pas::test
