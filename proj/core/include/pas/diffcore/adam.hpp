#pragma once

#include <map>
#include <string>

#include "pas/diffcore/param_store.hpp"

namespace pas {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  struct Moments {
    Matrix m;
    Matrix v;
  };

  AdamConfig config;
  long step = 0;
  std::map<std::string, Moments> moments;
};

// One bias-corrected Adam update of every parameter in `params` using the
// gradients stored alongside them. Missing gradients count as zero.
void adam_step(ParamStore& params, AdamState& state);

}  // namespace pas
