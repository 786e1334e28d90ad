#pragma once

#include <array>
#include <cstdint>

#include "pas/model_config.hpp"
#include "pas/supernet/arch.hpp"

namespace pas {

struct SearchConfig {
  int layers = 2;
  int hidden = 32;
  double pool_ratio = 0.5;
  double tau = 0.2;
  int epochs = 200;
  int batch_size = 64;
  double lr_w = 0.005;
  double lr_alpha = 0.003;
  std::uint64_t seed = 0;
  SitePins pins;
  std::array<double, 3> split{0.8, 0.1, 0.1};
  // Independent searches with derived seeds; the one with the best final
  // validation accuracy wins.
  int search_repeats = 1;
  Activation activation = Activation::kRelu;
  bool readout0_after_aggregation = false;
  // Worker threads for folds and random-search trials.
  int threads = 1;

  // Throws ContractError naming the first invalid field.
  void validate() const;
  ModelConfig model_config(Eigen::Index in_dim, int num_classes) const;
};

}  // namespace pas
