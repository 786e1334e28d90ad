#pragma once

#include <string>
#include <vector>

#include "pas/diffcore/param_store.hpp"
#include "pas/error.hpp"
#include "pas/graphdata/graph.hpp"
#include "pas/graphdata/splits.hpp"
#include "pas/search/config.hpp"
#include "pas/supernet/arch.hpp"

namespace pas {

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> val_acc;
  double wall_time_seconds = 0.0;
  // Epoch chosen by model selection (-1 when no epoch ran).
  int best_epoch = -1;
  double best_val_acc = 0.0;
  double best_val_loss = 0.0;

  int epochs() const { return static_cast<int>(train_loss.size()); }
};

// CSV with header epoch,train_loss,val_loss,val_acc (epochs counted from 1).
std::string to_csv(const TrainReport& r);
nlohmann::json to_json(const TrainReport& r);

// Raised when a loss turns non-finite; carries the epochs completed so far.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, TrainReport report)
      : NumericError(what), report_(std::move(report)) {}
  const TrainReport& report() const { return report_; }

 private:
  TrainReport report_;
};

struct Metrics {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Mean cross-entropy and accuracy of a derived architecture on `indices`.
Metrics evaluate(const Dataset& ds, std::span<const int> indices, const DerivedArch& arch, ParamStore& params,
                 const ModelConfig& mcfg, int batch_size = 64);

struct SearchResult {
  DerivedArch arch;
  TrainReport report;
  Split split;
  // Final architecture logits, keyed by site name.
  ParamStore alpha;
};

// The stratified train/val/test split pas_search and random_search draw from
// cfg.seed.
Split search_split(const Dataset& ds, const SearchConfig& cfg);

// Alternating first-order bi-level search: per epoch, Adam on the supernet
// weights over training minibatches, then Adam on the architecture logits
// over validation minibatches. Validation metrics in the report come from
// the relaxed forwards of the logit phase.
SearchResult pas_search(const Dataset& ds, const SearchConfig& cfg);

struct TrainResult {
  ParamStore params;
  TrainReport report;
};

// Trains arch from a fresh initialisation and keeps the parameters of the
// epoch with the best validation accuracy (ties: lower validation loss, then
// earlier epoch). With an empty validation set the last epoch is kept.
TrainResult train_architecture(const Dataset& ds, std::span<const int> train, std::span<const int> val,
                               const DerivedArch& arch, const SearchConfig& cfg);

struct FoldResult {
  int fold = 0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
};

struct CvResult {
  std::vector<FoldResult> folds;
  double mean = 0.0;
  double std = 0.0;  // population
  double wall_time_seconds = 0.0;
};

// Stratified k-fold evaluation. Each fold trains on the remaining graphs
// with a stratified 1/9 validation carve-out and tests on the held-out fold.
CvResult cross_validate(const Dataset& ds, const DerivedArch& arch, int k, const SearchConfig& cfg);

struct RandomTrial {
  DerivedArch arch;
  double val_acc = 0.0;
  double val_loss = 0.0;
};

struct RandomSearchResult {
  DerivedArch best;
  std::vector<RandomTrial> trials;
  Split split;
  double wall_time_seconds = 0.0;
};

// n architectures sampled uniformly per site (pins respected), each trained
// for cfg.epochs on the search split; best by validation accuracy, ties by
// validation loss then trial order.
RandomSearchResult random_search(const Dataset& ds, const SearchConfig& cfg, int n);

}  // namespace pas
