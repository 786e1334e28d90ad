#include "pas/readmerge.hpp"

#include <algorithm>
#include <numeric>

#include "pas/diffcore/ops.hpp"
#include "pas/error.hpp"

namespace pas {
namespace {

struct Params {
  Tape& tape;
  ParamStore& store;
  const std::string& prefix;

  Var weight(const char* name, Eigen::Index r, Eigen::Index c) {
    return tape.param(store.get_or_create(prefix + "/" + name, r, c, Init::kGlorot));
  }
  Var bias(const char* name, Eigen::Index c) {
    return tape.param(store.get_or_create(prefix + "/" + name, 1, c, Init::kZeros));
  }
};

Var sort_readout(Params& p, const MixedGraph& g, const ModelConfig& cfg) {
  const Matrix& h = g.feat.value();
  const std::vector<bool> active = active_nodes(g.mask.value());
  std::vector<int> order;
  for (std::size_t v = 0; v < active.size(); ++v) {
    if (active[v]) order.push_back(static_cast<int>(v));
  }
  const Eigen::Index last = h.cols() - 1;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return h(a, last) > h(b, last); });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(cfg.sort_k)));
  std::vector<int> slots(order.size());
  std::iota(slots.begin(), slots.end(), 0);
  Var top = scatter_rows(gather_rows(g.feat, order), slots, cfg.sort_k);
  Var flat = reshape(top, 1, cfg.sort_k * cfg.hidden);
  return add(matmul(flat, p.weight("proj", cfg.sort_k * cfg.hidden, cfg.hidden)), p.bias("proj_b", cfg.hidden));
}

Var att_readout(Params& p, const MixedGraph& g, const ModelConfig& cfg) {
  Var gate = sigmoid(add_row(matmul(g.feat, p.weight("gate", cfg.hidden, 1)), p.bias("gate_b", 1)));
  Var values = matmul(g.feat, p.weight("W", cfg.hidden, cfg.hidden));
  return col_sum(mul_col(values, mul(gate, g.mask)));
}

Var set2set_readout(Params& p, const MixedGraph& g, const ModelConfig& cfg) {
  const Eigen::Index d = cfg.hidden;
  const std::vector<bool> active = active_nodes(g.mask.value());
  Var wx = p.weight("lstm_Wx", 2 * d, 4 * d);
  Var wh = p.weight("lstm_Wh", d, 4 * d);
  Var b = p.bias("lstm_b", 4 * d);
  LstmState state{p.tape.constant(Matrix::Zero(1, d)), p.tape.constant(Matrix::Zero(1, d))};
  Var q_star = p.tape.constant(Matrix::Zero(1, 2 * d));
  for (int step = 0; step < cfg.set2set_steps; ++step) {
    state = lstm_cell(q_star, state, wx, wh, b);
    Var e = matmul(g.feat, transpose(state.h));
    Var a = softmax(e, active);
    Var r = matmul(transpose(a), g.feat);
    q_star = concat_cols({state.h, r});
  }
  return add(matmul(q_star, p.weight("proj", 2 * d, d)), p.bias("proj_b", d));
}

Var mean_readout(const MixedGraph& g) {
  Var num = col_sum(mul_col(g.feat, g.mask));
  Var den = clamp_min(sum(g.mask), 1e-12);
  return scale_by(num, pow(den, -1.0));
}

}  // namespace

Var readout(ReadoutKind kind, const MixedGraph& g, ParamStore& params, const std::string& prefix,
            const ModelConfig& cfg) {
  if (g.feat.cols() != cfg.hidden) throw ContractError("readout: feature width must equal the hidden size");
  Params p{*g.feat.tape(), params, prefix};
  switch (kind) {
    case ReadoutKind::kSort: return sort_readout(p, g, cfg);
    case ReadoutKind::kAtt: return att_readout(p, g, cfg);
    case ReadoutKind::kSet2Set: return set2set_readout(p, g, cfg);
    case ReadoutKind::kMean: return mean_readout(g);
    case ReadoutKind::kMax: return col_max(g.feat, active_nodes(g.mask.value()));
    case ReadoutKind::kSum: return col_sum(g.feat);
    case ReadoutKind::kZero: return p.tape.constant(Matrix::Zero(1, cfg.hidden));
  }
  throw ContractError("readout: unknown kind");
}

Var merge(MergeKind kind, const std::vector<Var>& zs, ParamStore& params, const std::string& prefix,
          const ModelConfig& cfg) {
  if (zs.empty()) throw ContractError("merge: empty sequence");
  for (const Var& z : zs) {
    if (z.rows() != 1 || z.cols() != cfg.hidden) throw ContractError("merge: every input must be 1 x hidden");
  }
  Params p{*zs.front().tape(), params, prefix};
  const Eigen::Index d = cfg.hidden;
  auto total = [&] {
    Var acc = zs.front();
    for (std::size_t i = 1; i < zs.size(); ++i) acc = add(acc, zs[i]);
    return acc;
  };
  switch (kind) {
    case MergeKind::kSum: return total();
    case MergeKind::kMean: return scale(total(), 1.0 / static_cast<double>(zs.size()));
    case MergeKind::kMax: return col_max(concat_rows(zs));
    case MergeKind::kConcat: {
      const auto width = static_cast<Eigen::Index>(zs.size()) * d;
      return add(matmul(concat_cols(zs), p.weight("proj", width, d)), p.bias("proj_b", d));
    }
    case MergeKind::kLstm: {
      Var wx = p.weight("lstm_Wx", d, 4 * d);
      Var wh = p.weight("lstm_Wh", d, 4 * d);
      Var b = p.bias("lstm_b", 4 * d);
      LstmState state{p.tape.constant(Matrix::Zero(1, d)), p.tape.constant(Matrix::Zero(1, d))};
      for (const Var& z : zs) state = lstm_cell(z, state, wx, wh, b);
      return state.h;
    }
  }
  throw ContractError("merge: unknown kind");
}

Var classify(Var z, ParamStore& params, const std::string& prefix, const ModelConfig& cfg) {
  Params p{*z.tape(), params, prefix};
  return add_row(matmul(z, p.weight("W", z.cols(), cfg.num_classes)), p.bias("b", cfg.num_classes));
}

Var xent_loss(Var logits, std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows()) {
    throw ContractError("xent_loss: one label per logits row required");
  }
  Var total;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::vector<int> row{static_cast<int>(i)};
    Var ce = cross_entropy(gather_rows(logits, row), labels[i]);
    total = total.valid() ? add(total, ce) : ce;
  }
  return scale(total, 1.0 / static_cast<double>(labels.size()));
}

}  // namespace pas
