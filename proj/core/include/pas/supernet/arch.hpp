#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pas/diffcore/param_store.hpp"
#include "pas/diffcore/rng.hpp"
#include "pas/diffcore/tape.hpp"
#include "pas/kinds.hpp"

namespace pas {

// One concrete operation per decision site.
struct DerivedArch {
  struct Layer {
    AggKind agg = AggKind::kGcn;
    PoolKind pool = PoolKind::kNone;
    friend bool operator==(const Layer&, const Layer&) = default;
  };
  std::vector<Layer> layers;
  std::vector<ReadoutKind> readouts;  // layers.size() + 1 positions
  MergeKind merge = MergeKind::kSum;

  int num_layers() const { return static_cast<int>(layers.size()); }
  // Throws ContractError unless readouts.size() == layers.size() + 1 >= 2.
  void validate() const;
  std::string describe() const;

  friend bool operator==(const DerivedArch&, const DerivedArch&) = default;
};

// {"layers": [{"agg": "GCN", "pool": "NONE"}, ...], "readouts": [...], "merge": "M_SUM"}
nlohmann::json to_json(const DerivedArch& arch);
DerivedArch arch_from_json(const nlohmann::json& j);

enum class SiteType { kAgg, kPool, kReadout, kMerge };

struct Site {
  SiteType type;
  int index = 0;  // layer for agg/pool, position for readout, 0 for merge
};

int num_ops(SiteType t);
std::string site_name(const Site& s);

// Optional fixed operation per site. Vectors may be shorter than the layer
// count; missing entries are unpinned.
struct SitePins {
  std::vector<std::optional<AggKind>> agg;
  std::vector<std::optional<PoolKind>> pool;
  std::vector<std::optional<ReadoutKind>> readout;
  std::optional<MergeKind> merge;

  std::optional<int> pinned(const Site& s) const;
  bool empty() const;
};

// Pins for the named ablation variants: "PAS-Global" (pooling NONE),
// "PAS-FR" (readouts GLOBAL_MEAN), "PAS-RM" (only the last readout active,
// merge M_SUM), "PAS-GCN" / "PAS-GAT" (aggregation fixed).
SitePins ablation_pins(const std::string& variant, int layers);

// Pins every site to the operation chosen in arch.
SitePins pin_all(const DerivedArch& arch);

// Unconstrained architecture logits, one row vector per decision site,
// stored under "alpha/<site>" in a ParamStore so Adam can update them.
class ArchParams {
 public:
  ArchParams(int layers, double tau, std::uint64_t seed, SitePins pins = {});

  int layers() const { return layers_; }
  double tau() const { return tau_; }
  void set_tau(double tau);
  const SitePins& pins() const { return pins_; }

  std::vector<Site> sites() const;
  ParamStore& logits() { return logits_; }
  const ParamStore& logits() const { return logits_; }
  Parameter& logit(const Site& s);
  const Parameter& logit(const Site& s) const;

 private:
  int layers_;
  double tau_;
  SitePins pins_;
  ParamStore logits_;
};

// Gumbel-softmax weights c_i = softmax((alpha + noise) / tau), computed with
// a max-shift. noise must be 1 x K (zeros to disable).
Var relax_weights(Var alpha, double tau, const Matrix& noise);
Matrix relax_weights(const Matrix& alpha, double tau, const Matrix& noise);

// Argmax of the noise-free logits per site; ties pick the lowest index and
// pinned sites return their pin.
DerivedArch derive(const ArchParams& arch);

// Uniform sample per site, respecting pins.
DerivedArch sample_arch(int layers, const SitePins& pins, Rng& rng);

}  // namespace pas
