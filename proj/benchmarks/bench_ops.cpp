#include <benchmark/benchmark.h>

#include "pas/aggops.hpp"
#include "pas/diffcore/ops.hpp"
#include "pas/graphdata/batch.hpp"
#include "pas/graphdata/synthetic.hpp"
#include "pas/poolops.hpp"
#include "pas/supernet/model.hpp"

namespace pas {
namespace {

Graph random_graph(Rng& rng, Eigen::Index n, Eigen::Index d) {
  Graph g;
  g.adj = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (rng.bernoulli(4.0 / static_cast<double>(n))) g.adj(i, j) = g.adj(j, i) = 1.0;
    }
  }
  g.feat.resize(n, d);
  for (Eigen::Index i = 0; i < g.feat.size(); ++i) g.feat.data()[i] = rng.uniform();
  return g;
}

ModelConfig config(Eigen::Index in_dim) {
  ModelConfig cfg;
  cfg.in_dim = in_dim;
  cfg.hidden = 32;
  cfg.layers = 2;
  return cfg;
}

void BM_Aggregate(benchmark::State& state) {
  const auto kind = static_cast<AggKind>(state.range(0));
  const auto n = static_cast<Eigen::Index>(state.range(1));
  Rng rng(1);
  const Graph g = random_graph(rng, n, 32);
  const ModelConfig cfg = config(32);
  ParamStore params(2);
  for (auto _ : state) {
    Tape t;
    const MixedGraph mg{t.constant(g.adj), t.constant(g.feat), t.constant(Matrix::Ones(n, 1))};
    benchmark::DoNotOptimize(aggregate(kind, mg, params, "agg", cfg).value().data());
  }
  state.SetLabel(to_string(kind));
}
BENCHMARK(BM_Aggregate)->ArgsProduct({benchmark::CreateDenseRange(0, kNumAggKinds - 1, 1), {20, 80}});

void BM_Pool(benchmark::State& state) {
  const auto kind = static_cast<PoolKind>(state.range(0));
  const auto mode = state.range(1) == 0 ? PoolMode::kDiscrete : PoolMode::kMasked;
  Rng rng(3);
  const Eigen::Index n = 40;
  const Graph g = random_graph(rng, n, 32);
  const ModelConfig cfg = config(32);
  ParamStore params(4);
  for (auto _ : state) {
    Tape t;
    const MixedGraph mg{t.constant(g.adj), t.constant(g.feat), t.constant(Matrix::Ones(n, 1))};
    benchmark::DoNotOptimize(pool(kind, mode, mg, params, "pool", cfg).graph.feat.value().data());
  }
  state.SetLabel(to_string(kind) + (mode == PoolMode::kDiscrete ? " discrete" : " masked"));
}
BENCHMARK(BM_Pool)->ArgsProduct({benchmark::CreateDenseRange(0, kNumPoolKinds - 1, 1), {0, 1}});

struct BatchFixture {
  Dataset ds;
  GraphBatch batch;
  ModelConfig cfg;
  explicit BatchFixture(int graphs) {
    SyntheticParams p;
    p.count = graphs;
    ds = gen_synthetic(SyntheticKind::kFeatureSum, p, 5);
    std::vector<int> idx(static_cast<std::size_t>(graphs));
    for (int i = 0; i < graphs; ++i) idx[static_cast<std::size_t>(i)] = i;
    batch = make_batch(ds, idx);
    cfg = config(ds.feature_dim);
  }
};

void BM_SupernetStep(benchmark::State& state) {
  BatchFixture f(static_cast<int>(state.range(0)));
  ArchParams arch(f.cfg.layers, 0.2, 6);
  ParamStore weights(7);
  Rng rng(8);
  for (auto _ : state) {
    Tape t;
    Var logits = supernet_forward(t, f.batch, arch, weights, f.cfg, rng);
    t.backward(sum(logits));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SupernetStep)->Arg(16)->Arg(64);

void BM_DiscreteStep(benchmark::State& state) {
  BatchFixture f(static_cast<int>(state.range(0)));
  DerivedArch arch;
  arch.layers = {{AggKind::kGcn, PoolKind::kSag}, {AggKind::kGat, PoolKind::kTopK}};
  arch.readouts = {ReadoutKind::kSum, ReadoutKind::kAtt, ReadoutKind::kSet2Set};
  arch.merge = MergeKind::kLstm;
  ParamStore weights(9);
  for (auto _ : state) {
    Tape t;
    Var logits = discrete_forward(t, f.batch, arch, weights, f.cfg);
    t.backward(sum(logits));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DiscreteStep)->Arg(16)->Arg(64);

}  // namespace
}  // namespace pas

BENCHMARK_MAIN();
