#include "pas/gradsuite.hpp"

#include <algorithm>
#include <utility>

#include "pas/aggops.hpp"
#include "pas/diffcore/gradcheck.hpp"
#include "pas/diffcore/ops.hpp"
#include "pas/diffcore/rng.hpp"
#include "pas/error.hpp"
#include "pas/poolops.hpp"
#include "pas/readmerge.hpp"
#include "pas/supernet/arch.hpp"

namespace pas {

double GradSuiteResult::max_rel_error() const {
  double worst = 0.0;
  for (const auto& c : cases) worst = std::max(worst, c.max_rel_error);
  return worst;
}

Eigen::Index GradSuiteResult::skipped() const {
  Eigen::Index n = 0;
  for (const auto& c : cases) n += c.skipped;
  return n;
}

bool GradSuiteResult::passed() const {
  return !cases.empty() && std::all_of(cases.begin(), cases.end(), [](const auto& c) { return c.passed; });
}

std::vector<GradSuiteCase> GradSuiteResult::failures() const {
  std::vector<GradSuiteCase> out;
  for (const auto& c : cases) {
    if (!c.passed) out.push_back(c);
  }
  return out;
}

namespace {

constexpr const char* kInput = "input/H";

Matrix uniform(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

// Symmetric weighted adjacency with zero diagonal.
Matrix random_adjacency(Rng& rng, Eigen::Index n) {
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (rng.uniform() < 0.3) a(i, j) = a(j, i) = rng.uniform(0.3, 1.0);
    }
  }
  return a;
}

// Fixed random projection to a scalar, so every output entry matters.
Var probe(Var out, std::uint64_t seed) {
  Rng rng(seed);
  return sum(mul_const(out, uniform(rng, out.rows(), out.cols())));
}

struct Runner {
  const GradSuiteOptions& opts;
  const std::function<void(const GradSuiteCase&)>& progress;
  GradSuiteResult& result;
  Rng& rng;

  // Materialises the parameters of f, randomises every non-input parameter
  // and records a gradient check of f.
  void check(const std::string& name, int graph, Eigen::Index nodes, ParamStore& p, const ScalarFunction& f) {
    {
      Tape t;
      f(t);
    }
    for (auto& [key, param] : p) {
      if (key != kInput) param.value = uniform(rng, param.value.rows(), param.value.cols());
    }
    GradCheckOptions gc;
    gc.step = opts.step;
    gc.relative_floor = opts.relative_floor;
    gc.skip_kinks = true;
    gc.kink_tolerance = opts.kink_tolerance;
    const GradCheckReport r = grad_check(f, p, gc);
    GradSuiteCase c{name, graph, nodes, 0.0, {}, r.checked(), r.skipped(), false};
    for (const auto& e : r.entries) {
      if (!(e.max_rel_error <= c.max_rel_error)) {
        c.max_rel_error = e.max_rel_error;
        c.worst_key = e.key;
      }
    }
    const double total = static_cast<double>(c.checked + c.skipped);
    c.passed = c.max_rel_error <= opts.tolerance && static_cast<double>(c.skipped) <= opts.max_skipped_fraction * total;
    result.cases.push_back(c);
    if (progress) progress(c);
  }
};

}  // namespace

GradSuiteResult run_gradient_suite(const GradSuiteOptions& opts,
                                   const std::function<void(const GradSuiteCase&)>& progress) {
  if (opts.graphs < 1 || opts.min_nodes < 1 || opts.max_nodes < opts.min_nodes || opts.hidden < 1) {
    throw ContractError("run_gradient_suite: invalid options");
  }
  GradSuiteResult result;
  result.tolerance = opts.tolerance;
  Rng rng(opts.seed);
  Runner run{opts, progress, result, rng};

  ModelConfig cfg;
  cfg.in_dim = opts.hidden;
  cfg.hidden = opts.hidden;
  cfg.num_classes = 3;
  cfg.sort_k = 3;
  const std::uint64_t probe_seed = rng.next_u64();

  for (int g = 0; g < opts.graphs; ++g) {
    const auto span = static_cast<std::uint64_t>(opts.max_nodes - opts.min_nodes + 1);
    const Eigen::Index n = opts.min_nodes + static_cast<Eigen::Index>(rng.below(span));
    const Matrix adj = random_adjacency(rng, n);
    const Matrix mask = uniform(rng, n, 1, 0.2, 1.0);
    const Matrix feat = uniform(rng, n, opts.hidden);
    auto graph_on = [&](Tape& t, ParamStore& p) {
      return MixedGraph{t.constant(adj), t.param(p.at(kInput)), t.constant(mask)};
    };
    auto fresh = [&] {
      ParamStore p(rng.next_u64());
      p.get_or_create(kInput, n, opts.hidden).value = feat;
      return p;
    };

    for (int k = 0; k < kNumAggKinds; ++k) {
      const auto kind = static_cast<AggKind>(k);
      ParamStore p = fresh();
      run.check("agg/" + to_string(kind), g, n, p,
                [&](Tape& t) { return probe(aggregate(kind, graph_on(t, p), p, "k", cfg), probe_seed); });
    }
    for (int k = 0; k < kNumPoolKinds; ++k) {
      const auto kind = static_cast<PoolKind>(k);
      if (!pool_is_parameterized(kind)) continue;
      ParamStore p = fresh();
      run.check("pool/" + to_string(kind), g, n, p, [&](Tape& t) {
        return probe(pool(kind, PoolMode::kMasked, graph_on(t, p), p, "k", cfg).graph.feat, probe_seed);
      });
    }
    for (int k = 0; k < kNumReadoutKinds; ++k) {
      const auto kind = static_cast<ReadoutKind>(k);
      ParamStore p = fresh();
      run.check("readout/" + to_string(kind), g, n, p,
                [&](Tape& t) { return probe(readout(kind, graph_on(t, p), p, "r", cfg), probe_seed); });
    }
    for (int k = 0; k < kNumMergeKinds; ++k) {
      const auto kind = static_cast<MergeKind>(k);
      ParamStore p(rng.next_u64());
      p.get_or_create("z", 3, opts.hidden).value = uniform(rng, 3, opts.hidden);
      run.check("merge/" + to_string(kind), g, n, p, [&](Tape& t) {
        Var z = t.param(p.at("z"));
        std::vector<Var> zs;
        for (int i = 0; i < 3; ++i) zs.push_back(gather_rows(z, std::vector<int>{i}));
        return probe(merge(kind, zs, p, "m", cfg), probe_seed);
      });
    }
    {
      // Classifier on a sum readout of this graph, through the loss.
      ParamStore p = fresh();
      const std::vector<int> label{static_cast<int>(rng.below(3))};
      run.check("classifier", g, n, p, [&](Tape& t) {
        return xent_loss(classify(readout(ReadoutKind::kSum, graph_on(t, p), p, "r", cfg), p, "c", cfg), label);
      });
    }
    const std::pair<SiteType, const char*> site_types[] = {
        {SiteType::kAgg, "agg"}, {SiteType::kPool, "pool"}, {SiteType::kReadout, "readout"}, {SiteType::kMerge, "merge"}};
    for (const auto& [type, type_name] : site_types) {
      const int width = num_ops(type);
      ParamStore p;
      p.get_or_create("alpha", 1, width).value = uniform(rng, 1, width, -0.3, 0.3);
      const Matrix noise = 0.1 * gumbel_noise(rng, width);
      const double tau = rng.uniform(0.2, 1.0);
      run.check(std::string("relax/") + type_name, g, n, p,
                [&](Tape& t) { return probe(relax_weights(t.param(p.at("alpha")), tau, noise), probe_seed); });
    }
  }
  return result;
}

}  // namespace pas
