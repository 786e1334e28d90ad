#include "pas/aggops.hpp"

#include "pas/diffcore/ops.hpp"
#include "pas/error.hpp"

namespace pas {
namespace {

struct Ctx {
  Tape& tape;
  ParamStore& params;
  const std::string& prefix;

  Var weight(const char* name, Eigen::Index rows, Eigen::Index cols) {
    return tape.param(params.get_or_create(prefix + "/" + name, rows, cols, Init::kGlorot));
  }
  Var bias(const char* name, Eigen::Index cols) {
    return tape.param(params.get_or_create(prefix + "/" + name, 1, cols, Init::kZeros));
  }
};

Matrix identity(Eigen::Index n) { return Matrix::Identity(n, n); }

Var gcn(Ctx& c, const MixedGraph& g, const ModelConfig& cfg) {
  const Eigen::Index din = g.feat.cols();
  Var a_hat = add_const(g.adj, identity(g.num_nodes()));
  Var dinv = pow(row_sum(a_hat), -0.5);
  Var xw = matmul(g.feat, c.weight("W", din, cfg.hidden));
  Var prop = mul_col(matmul(a_hat, mul_col(xw, dinv)), dinv);
  return activate(add_row(prop, c.bias("b", cfg.hidden)), cfg.activation);
}

Var gat(Ctx& c, const MixedGraph& g, const ModelConfig& cfg) {
  const Eigen::Index n = g.num_nodes();
  const Eigen::Index din = g.feat.cols();
  Var xw = matmul(g.feat, c.weight("W", din, cfg.hidden));
  Var src = matmul(xw, c.weight("att_src", cfg.hidden, 1));  // contribution of sender u
  Var dst = matmul(xw, c.weight("att_dst", cfg.hidden, 1));  // contribution of receiver v
  // scores(v, u) = LeakyReLU(a . [W h_u || W h_v])
  Var scores = leaky_relu(outer_add(dst, transpose(src)), cfg.gat_slope);
  const Matrix& a = g.adj.value();
  Matrix allowed = (a.array() > 0.0).cast<double>().matrix();
  allowed.diagonal().setOnes();
  Var attn = softmax_rows(scores, allowed);
  Var edge_w = add_const(g.adj, identity(n));
  Var prop = matmul(mul(attn, edge_w), xw);
  return activate(add_row(prop, c.bias("b", cfg.hidden)), cfg.activation);
}

Var sage(Ctx& c, const MixedGraph& g, const ModelConfig& cfg) {
  const Eigen::Index din = g.feat.cols();
  Var deg = clamp_min(row_sum(g.adj), 1e-12);
  Var mean_nb = mul_col(matmul(g.adj, g.feat), pow(deg, -1.0));
  Var out = add(matmul(g.feat, c.weight("W_self", din, cfg.hidden)), matmul(mean_nb, c.weight("W_nb", din, cfg.hidden)));
  return activate(add_row(out, c.bias("b", cfg.hidden)), cfg.activation);
}

Var gin(Ctx& c, const MixedGraph& g, const ModelConfig& cfg) {
  const Eigen::Index din = g.feat.cols();
  Var eps = c.tape.param(c.params.get_or_create(c.prefix + "/eps", 1, 1, Init::kZeros));
  Var one = c.tape.constant(Matrix::Ones(1, 1));
  Var combined = add(scale_by(g.feat, add(one, eps)), matmul(g.adj, g.feat));
  Var hidden = activate(add_row(matmul(combined, c.weight("W0", din, cfg.hidden)), c.bias("b0", cfg.hidden)),
                        cfg.activation);
  return add_row(matmul(hidden, c.weight("W1", cfg.hidden, cfg.hidden)), c.bias("b1", cfg.hidden));
}

Var graphconv(Ctx& c, const MixedGraph& g, const ModelConfig& cfg) {
  const Eigen::Index din = g.feat.cols();
  Var out = add(matmul(g.feat, c.weight("W_self", din, cfg.hidden)),
                matmul(matmul(g.adj, g.feat), c.weight("W_nb", din, cfg.hidden)));
  return activate(add_row(out, c.bias("b", cfg.hidden)), cfg.activation);
}

Var mlp(Ctx& c, const MixedGraph& g, const ModelConfig& cfg) {
  const Eigen::Index din = g.feat.cols();
  Var h = activate(add_row(matmul(g.feat, c.weight("W0", din, cfg.hidden)), c.bias("b0", cfg.hidden)), cfg.activation);
  return activate(add_row(matmul(h, c.weight("W1", cfg.hidden, cfg.hidden)), c.bias("b1", cfg.hidden)), cfg.activation);
}

}  // namespace

Var aggregate(AggKind kind, const MixedGraph& g, ParamStore& params, const std::string& prefix,
              const ModelConfig& cfg) {
  Ctx c{*g.feat.tape(), params, prefix};
  Var out;
  switch (kind) {
    case AggKind::kGcn: out = gcn(c, g, cfg); break;
    case AggKind::kGat: out = gat(c, g, cfg); break;
    case AggKind::kSage: out = sage(c, g, cfg); break;
    case AggKind::kGin: out = gin(c, g, cfg); break;
    case AggKind::kGraphConv: out = graphconv(c, g, cfg); break;
    case AggKind::kMlp: out = mlp(c, g, cfg); break;
  }
  out = mul_col(out, g.mask);
  if (!out.value().allFinite()) throw NumericError("aggregation " + to_string(kind) + " produced non-finite values");
  return out;
}

}  // namespace pas
