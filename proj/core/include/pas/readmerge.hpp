#pragma once

#include <span>
#include <string>
#include <vector>

#include "pas/diffcore/param_store.hpp"
#include "pas/model_config.hpp"

namespace pas {

// Graph-level readout of one graph to a 1 x cfg.hidden row. Active nodes
// are those with mask > 1e-12; the mask also weights GLOBAL_MEAN and
// GLOBAL_ATT. GLOBAL_SORT, SET2SET project their wider outputs back to
// cfg.hidden with a learned linear map. Input width must equal cfg.hidden.
Var readout(ReadoutKind kind, const MixedGraph& g, ParamStore& params, const std::string& prefix,
            const ModelConfig& cfg);

// Combines the per-layer graph vectors z^0..z^L (each 1 x cfg.hidden).
// M_LSTM returns the final hidden state of an LSTM run in layer order;
// M_CONCAT projects the concatenation back to cfg.hidden.
Var merge(MergeKind kind, const std::vector<Var>& zs, ParamStore& params, const std::string& prefix,
          const ModelConfig& cfg);

// Linear classifier head: z W_c + b_c -> 1 x num_classes.
Var classify(Var z, ParamStore& params, const std::string& prefix, const ModelConfig& cfg);

// Mean over rows of -log softmax(logits_i)[labels_i].
Var xent_loss(Var logits, std::span<const int> labels);

}  // namespace pas
