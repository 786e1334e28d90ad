#pragma once

#include <string>

#include "pas/diffcore/param_store.hpp"
#include "pas/model_config.hpp"

namespace pas {

// Applies one aggregation operation to g and re-applies g.mask to the
// output rows. Input width is g.feat.cols(), output width cfg.hidden.
// Parameters live under `prefix` in `params` and are created on first use.
//
//   GCN        act(D^-1/2 (A+I) D^-1/2 H W + b)
//   GAT        single-head attention over {u : A_vu > 0} U {v}, messages
//              weighted by A_vu (1 for the self term)
//   SAGE       act(H W1 + (A H / max(rowsum A, 1e-12)) W2 + b)
//   GIN        MLP2((1 + eps) H + A H), eps learnable, initialised to 0
//   GRAPHCONV  act(H W1 + A H W2 + b)
//   MLP        act(act(H W0 + b0) W1 + b1), ignores A
//
// Throws NumericError naming the kind if the output is not finite.
Var aggregate(AggKind kind, const MixedGraph& g, ParamStore& params, const std::string& prefix,
              const ModelConfig& cfg);

}  // namespace pas
