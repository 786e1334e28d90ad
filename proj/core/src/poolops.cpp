#include "pas/poolops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pas/diffcore/ops.hpp"
#include "pas/error.hpp"

namespace pas {
namespace {

Matrix neighbourhood(const Matrix& adj) {
  Matrix nb = (adj.array() > 0.0).cast<double>().matrix();
  nb.diagonal().setOnes();
  return nb;
}

Matrix hop_scores(const Matrix& adj, int order) {
  const Matrix nb = neighbourhood(adj);
  Matrix power = adj;
  Matrix s = Matrix::Zero(adj.rows(), 1);
  for (int i = 1; i <= order; ++i) {
    if (i > 1) power = power * adj;
    s += power.cwiseProduct(nb).rowwise().sum();
  }
  return s;
}

// Row u: sum over v in N~(u) of (h_u - h_v)^2, elementwise. Each pair term is
// computed directly, so nodes with mirror-image neighbourhoods (an isolated
// edge, say) get bit-identical scores and top-k ties stay exact.
Var neighbour_sq_diff(Tape& tape, Var h, const Matrix& nb) {
  const Matrix& hv = h.value();
  Matrix out = Matrix::Zero(hv.rows(), hv.cols());
  for (Eigen::Index u = 0; u < hv.rows(); ++u) {
    for (Eigen::Index v = 0; v < hv.rows(); ++v) {
      if (nb(u, v) != 0.0 && u != v) out.row(u) += (hv.row(u) - hv.row(v)).array().square().matrix();
    }
  }
  return tape.record(std::move(out), {h}, [h, nb](Tape& t, const Matrix& g) {
    const Matrix& hv = t.value(h);
    Matrix grad = Matrix::Zero(hv.rows(), hv.cols());
    for (Eigen::Index u = 0; u < hv.rows(); ++u) {
      for (Eigen::Index v = 0; v < hv.rows(); ++v) {
        if (nb(u, v) == 0.0 || u == v) continue;
        const Matrix term = 2.0 * g.row(u).cwiseProduct(hv.row(u) - hv.row(v));
        grad.row(u) += term;
        grad.row(v) -= term;
      }
    }
    t.accumulate(h, grad);
  });
}

}  // namespace

Var node_scores(PoolKind kind, const MixedGraph& g, ParamStore& params, const std::string& prefix,
                const ModelConfig& cfg) {
  Tape& tape = *g.feat.tape();
  const Eigen::Index d = g.feat.cols();
  const Eigen::Index n = g.num_nodes();
  auto weight = [&](const char* name, Eigen::Index r, Eigen::Index c) {
    return tape.param(params.get_or_create(prefix + "/" + name, r, c, Init::kGlorot));
  };
  auto bias = [&](const char* name, Eigen::Index c) {
    return tape.param(params.get_or_create(prefix + "/" + name, 1, c, Init::kZeros));
  };
  switch (kind) {
    case PoolKind::kTopK: {
      Var p = weight("p", d, 1);
      Var inv_norm = pow(sum(mul(p, p)), -0.5);
      return scale_by(matmul(g.feat, p), inv_norm);
    }
    case PoolKind::kSag: {
      Var a_hat = add_const(g.adj, Matrix::Identity(n, n));
      Var dinv = pow(row_sum(a_hat), -0.5);
      Var xw = matmul(g.feat, weight("W", d, 1));
      return add_row(mul_col(matmul(a_hat, mul_col(xw, dinv)), dinv), bias("b", 1));
    }
    case PoolKind::kAsap: {
      // sum_u A_vu (h_v W2 - h_u W3) = deg_v (h_v W2) - (A H W3)_v
      Var self = matmul(g.feat, weight("W1", d, 1));
      Var x2 = matmul(g.feat, weight("W2", d, 1));
      Var x3 = matmul(g.feat, weight("W3", d, 1));
      Var local = sub(mul(row_sum(g.adj), x2), matmul(g.adj, x3));
      return sigmoid(add_row(add(self, local), bias("b", 1)));
    }
    case PoolKind::kHop1:
    case PoolKind::kHop2:
    case PoolKind::kHop3:
      return tape.constant(hop_scores(g.adj.value(), hop_order(kind)));
    case PoolKind::kMlp: {
      Var h = activate(add_row(matmul(g.feat, weight("W0", d, d)), bias("b0", d)), cfg.activation);
      return sigmoid(add_row(matmul(h, weight("W1", d, 1)), bias("b1", 1)));
    }
    case PoolKind::kGc: {
      Var out = add(matmul(g.feat, weight("W_self", d, 1)), matmul(matmul(g.adj, g.feat), weight("W_nb", d, 1)));
      return add_row(out, bias("b", 1));
    }
    case PoolKind::kGap: {
      Var sq = neighbour_sq_diff(tape, g.feat, neighbourhood(g.adj.value()));
      return scale(matmul(sq, weight("w", d, 1)), 0.5);
    }
    case PoolKind::kNone:
      break;
  }
  throw ContractError("node_scores: NONE has no score function");
}

std::vector<int> top_k_select(const Matrix& scores, const Matrix& mask, double ratio) {
  std::vector<int> membership(static_cast<std::size_t>(scores.rows()), 0);
  return top_k_select(scores, mask, ratio, membership).front();
}

std::vector<std::vector<int>> top_k_select(const Matrix& scores, const Matrix& mask, double ratio,
                                           std::span<const int> membership) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ContractError("top_k_select: ratio must lie in (0, 1]");
  if (scores.rows() != mask.rows() || static_cast<Eigen::Index>(membership.size()) != scores.rows()) {
    throw ContractError("top_k_select: scores, mask and membership lengths differ");
  }
  const int graphs = membership.empty() ? 0 : membership.back() + 1;
  std::vector<std::vector<int>> cand(static_cast<std::size_t>(graphs));
  for (std::size_t v = 0; v < membership.size(); ++v) {
    if (mask(static_cast<Eigen::Index>(v), 0) > 1e-12) cand[static_cast<std::size_t>(membership[v])].push_back(static_cast<int>(v));
  }
  std::vector<std::vector<int>> out(cand.size());
  for (std::size_t g = 0; g < cand.size(); ++g) {
    auto& c = cand[g];
    if (c.empty()) throw ContractError("top_k_select: graph " + std::to_string(g) + " has no candidate nodes");
    const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(c.size()))));
    std::stable_sort(c.begin(), c.end(), [&](int a, int b) { return scores(a, 0) > scores(b, 0); });
    out[g].assign(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(std::min(k, c.size())));
    std::sort(out[g].begin(), out[g].end());
  }
  return out;
}

PoolResult pool_discrete(PoolKind kind, const MixedGraph& g, const std::vector<int>& idx, const Var& scores) {
  if (kind == PoolKind::kNone) {
    std::vector<int> all(static_cast<std::size_t>(g.num_nodes()));
    std::iota(all.begin(), all.end(), 0);
    return {g, all};
  }
  PoolResult r;
  r.idx = idx;
  r.graph.adj = gather_block(g.adj, idx);
  r.graph.mask = gather_rows(g.mask, idx);
  Var kept = gather_rows(g.feat, idx);
  r.graph.feat = pool_is_parameterized(kind) ? mul_col(kept, tanh(gather_rows(scores, idx))) : kept;
  return r;
}

PoolResult pool_masked(PoolKind kind, const MixedGraph& g, const std::vector<int>& idx, const Var& scores) {
  if (kind == PoolKind::kNone) {
    std::vector<int> all(static_cast<std::size_t>(g.num_nodes()));
    std::iota(all.begin(), all.end(), 0);
    return {g, all};
  }
  const Eigen::Index n = g.num_nodes();
  Matrix sel = Matrix::Zero(n, 1);
  for (int v : idx) sel(v, 0) = 1.0;
  PoolResult r;
  r.idx = idx;
  r.graph.adj = mul_const(g.adj, sel * sel.transpose());
  r.graph.mask = mul_const(g.mask, sel);
  if (pool_is_parameterized(kind)) {
    // Gate rows of kept nodes by tanh(score); unselected rows get gate 0.
    r.graph.feat = mul_col(g.feat, mul_const(tanh(scores), sel));
  } else {
    r.graph.feat = mul_col_const(g.feat, sel);
  }
  return r;
}

PoolResult pool(PoolKind kind, PoolMode mode, const MixedGraph& g, ParamStore& params, const std::string& prefix,
                const ModelConfig& cfg) {
  if (kind == PoolKind::kNone) return pool_discrete(kind, g, {}, Var());
  Var s = node_scores(kind, g, params, prefix, cfg);
  const std::vector<int> idx = top_k_select(s.value(), g.mask.value(), cfg.pool_ratio);
  return mode == PoolMode::kDiscrete ? pool_discrete(kind, g, idx, s) : pool_masked(kind, g, idx, s);
}

}  // namespace pas
