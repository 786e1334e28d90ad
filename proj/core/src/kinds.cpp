#include "pas/kinds.hpp"

#include "pas/error.hpp"

namespace pas {
namespace {

template <typename Enum, std::size_t N>
Enum parse_named(std::string_view s, const std::array<std::string_view, N>& names, const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  throw ContractError(std::string("unknown ") + what + " kind '" + std::string(s) + "'");
}

}  // namespace

std::string to_string(AggKind k) { return std::string(kAggNames[static_cast<std::size_t>(k)]); }
std::string to_string(PoolKind k) { return std::string(kPoolNames[static_cast<std::size_t>(k)]); }
std::string to_string(ReadoutKind k) { return std::string(kReadoutNames[static_cast<std::size_t>(k)]); }
std::string to_string(MergeKind k) { return std::string(kMergeNames[static_cast<std::size_t>(k)]); }

AggKind parse_agg(std::string_view s) { return parse_named<AggKind>(s, kAggNames, "aggregation"); }
PoolKind parse_pool(std::string_view s) { return parse_named<PoolKind>(s, kPoolNames, "pooling"); }
ReadoutKind parse_readout(std::string_view s) { return parse_named<ReadoutKind>(s, kReadoutNames, "readout"); }
MergeKind parse_merge(std::string_view s) { return parse_named<MergeKind>(s, kMergeNames, "merge"); }

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "elu") return Activation::kElu;
  if (s == "identity") return Activation::kIdentity;
  throw ContractError("unknown activation '" + std::string(s) + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kElu: return "elu";
    case Activation::kIdentity: return "identity";
  }
  return "relu";
}

}  // namespace pas
