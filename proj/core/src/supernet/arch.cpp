#include "pas/supernet/arch.hpp"

#include <cmath>
#include <sstream>

#include "pas/diffcore/ops.hpp"
#include "pas/error.hpp"

namespace pas {

void DerivedArch::validate() const {
  if (layers.empty()) throw ContractError("architecture needs at least one layer");
  if (readouts.size() != layers.size() + 1) {
    throw ContractError("architecture needs " + std::to_string(layers.size() + 1) + " readouts, got " +
                        std::to_string(readouts.size()));
  }
}

std::string DerivedArch::describe() const {
  std::ostringstream os;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    os << "L" << (l + 1) << "[" << to_string(layers[l].agg) << "," << to_string(layers[l].pool) << "] ";
  }
  os << "R[";
  for (std::size_t i = 0; i < readouts.size(); ++i) os << (i ? "," : "") << to_string(readouts[i]);
  os << "] " << to_string(merge);
  return os.str();
}

nlohmann::json to_json(const DerivedArch& arch) {
  nlohmann::json j;
  j["layers"] = nlohmann::json::array();
  for (const auto& l : arch.layers) j["layers"].push_back({{"agg", to_string(l.agg)}, {"pool", to_string(l.pool)}});
  j["readouts"] = nlohmann::json::array();
  for (auto r : arch.readouts) j["readouts"].push_back(to_string(r));
  j["merge"] = to_string(arch.merge);
  return j;
}

DerivedArch arch_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ContractError("architecture JSON must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "layers" && key != "readouts" && key != "merge") {
      throw ContractError("architecture JSON: unknown key '" + key + "'");
    }
  }
  DerivedArch a;
  try {
    for (const auto& l : j.at("layers")) {
      a.layers.push_back({parse_agg(l.at("agg").get<std::string>()), parse_pool(l.at("pool").get<std::string>())});
    }
    for (const auto& r : j.at("readouts")) a.readouts.push_back(parse_readout(r.get<std::string>()));
    a.merge = parse_merge(j.at("merge").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(std::string("architecture JSON: ") + e.what());
  }
  a.validate();
  return a;
}

int num_ops(SiteType t) {
  switch (t) {
    case SiteType::kAgg: return kNumAggKinds;
    case SiteType::kPool: return kNumPoolKinds;
    case SiteType::kReadout: return kNumReadoutKinds;
    case SiteType::kMerge: return kNumMergeKinds;
  }
  return 0;
}

std::string site_name(const Site& s) {
  switch (s.type) {
    case SiteType::kAgg: return "agg/" + std::to_string(s.index);
    case SiteType::kPool: return "pool/" + std::to_string(s.index);
    case SiteType::kReadout: return "readout/" + std::to_string(s.index);
    case SiteType::kMerge: return "merge";
  }
  return "";
}

std::optional<int> SitePins::pinned(const Site& s) const {
  auto at = [&](const auto& v) -> std::optional<int> {
    if (s.index < 0 || static_cast<std::size_t>(s.index) >= v.size() || !v[static_cast<std::size_t>(s.index)]) {
      return std::nullopt;
    }
    return static_cast<int>(*v[static_cast<std::size_t>(s.index)]);
  };
  switch (s.type) {
    case SiteType::kAgg: return at(agg);
    case SiteType::kPool: return at(pool);
    case SiteType::kReadout: return at(readout);
    case SiteType::kMerge: return merge ? std::optional<int>(static_cast<int>(*merge)) : std::nullopt;
  }
  return std::nullopt;
}

bool SitePins::empty() const {
  auto none = [](const auto& v) {
    for (const auto& x : v) {
      if (x) return false;
    }
    return true;
  };
  return none(agg) && none(pool) && none(readout) && !merge;
}

SitePins ablation_pins(const std::string& variant, int layers) {
  SitePins p;
  const auto L = static_cast<std::size_t>(layers);
  if (variant == "PAS-Global") {
    p.pool.assign(L, PoolKind::kNone);
  } else if (variant == "PAS-FR") {
    p.readout.assign(L + 1, ReadoutKind::kMean);
  } else if (variant == "PAS-RM") {
    p.readout.assign(L + 1, ReadoutKind::kZero);
    p.readout[L] = std::nullopt;
    p.merge = MergeKind::kSum;
  } else if (variant == "PAS-GCN") {
    p.agg.assign(L, AggKind::kGcn);
  } else if (variant == "PAS-GAT") {
    p.agg.assign(L, AggKind::kGat);
  } else if (variant != "PAS") {
    throw ContractError("unknown variant '" + variant + "'");
  }
  return p;
}

SitePins pin_all(const DerivedArch& arch) {
  arch.validate();
  SitePins p;
  for (const auto& layer : arch.layers) {
    p.agg.emplace_back(layer.agg);
    p.pool.emplace_back(layer.pool);
  }
  p.readout.assign(arch.readouts.begin(), arch.readouts.end());
  p.merge = arch.merge;
  return p;
}

ArchParams::ArchParams(int layers, double tau, std::uint64_t seed, SitePins pins)
    : layers_(layers), tau_(tau), pins_(std::move(pins)), logits_(seed) {
  if (layers < 1) throw ContractError("ArchParams: need at least one layer");
  set_tau(tau);
  for (const Site& s : sites()) logits_.get_or_create("alpha/" + site_name(s), 1, num_ops(s.type), Init::kSmall);
}

void ArchParams::set_tau(double tau) {
  if (!(tau > 0.0)) throw ContractError("temperature must be positive");
  tau_ = tau;
}

std::vector<Site> ArchParams::sites() const {
  std::vector<Site> out;
  for (int l = 0; l < layers_; ++l) {
    out.push_back({SiteType::kAgg, l});
    out.push_back({SiteType::kPool, l});
  }
  for (int r = 0; r <= layers_; ++r) out.push_back({SiteType::kReadout, r});
  out.push_back({SiteType::kMerge, 0});
  return out;
}

Parameter& ArchParams::logit(const Site& s) { return logits_.at("alpha/" + site_name(s)); }
const Parameter& ArchParams::logit(const Site& s) const { return logits_.at("alpha/" + site_name(s)); }

Var relax_weights(Var alpha, double tau, const Matrix& noise) {
  if (!(tau > 0.0)) throw ContractError("relax_weights: tau must be positive");
  if (noise.rows() != alpha.rows() || noise.cols() != alpha.cols()) {
    throw ContractError("relax_weights: noise shape differs from logits");
  }
  return softmax(scale(add_const(alpha, noise), 1.0 / tau));
}

Matrix relax_weights(const Matrix& alpha, double tau, const Matrix& noise) {
  Tape t;
  return relax_weights(t.constant(alpha), tau, noise).value();
}

DerivedArch derive(const ArchParams& arch) {
  auto pick = [&](const Site& s) {
    if (auto p = arch.pins().pinned(s)) return *p;
    const Matrix& a = arch.logit(s).value;
    int best = 0;
    for (int i = 1; i < a.cols(); ++i) {
      if (a(0, i) > a(0, best)) best = i;
    }
    return best;
  };
  DerivedArch d;
  for (int l = 0; l < arch.layers(); ++l) {
    d.layers.push_back({static_cast<AggKind>(pick({SiteType::kAgg, l})), static_cast<PoolKind>(pick({SiteType::kPool, l}))});
  }
  for (int r = 0; r <= arch.layers(); ++r) d.readouts.push_back(static_cast<ReadoutKind>(pick({SiteType::kReadout, r})));
  d.merge = static_cast<MergeKind>(pick({SiteType::kMerge, 0}));
  return d;
}

DerivedArch sample_arch(int layers, const SitePins& pins, Rng& rng) {
  auto pick = [&](const Site& s) {
    // Draw even for pinned sites so pins do not shift the stream of others.
    const int drawn = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_ops(s.type))));
    if (auto p = pins.pinned(s)) return *p;
    return drawn;
  };
  DerivedArch d;
  for (int l = 0; l < layers; ++l) {
    const auto agg = static_cast<AggKind>(pick({SiteType::kAgg, l}));
    const auto pool = static_cast<PoolKind>(pick({SiteType::kPool, l}));
    d.layers.push_back({agg, pool});
  }
  for (int r = 0; r <= layers; ++r) d.readouts.push_back(static_cast<ReadoutKind>(pick({SiteType::kReadout, r})));
  d.merge = static_cast<MergeKind>(pick({SiteType::kMerge, 0}));
  return d;
}

}  // namespace pas
