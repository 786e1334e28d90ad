#pragma once

#include <array>
#include <string>
#include <string_view>

namespace pas {

// Declaration order is significant: it fixes tie-breaking during derivation
// and the layout of every architecture-logit vector.
enum class AggKind { kGcn, kGat, kSage, kGin, kGraphConv, kMlp };
enum class PoolKind { kTopK, kSag, kAsap, kHop1, kHop2, kHop3, kMlp, kGc, kGap, kNone };
enum class ReadoutKind { kSort, kAtt, kSet2Set, kMean, kMax, kSum, kZero };
enum class MergeKind { kLstm, kConcat, kMax, kMean, kSum };

inline constexpr int kNumAggKinds = 6;
inline constexpr int kNumPoolKinds = 10;
inline constexpr int kNumReadoutKinds = 7;
inline constexpr int kNumMergeKinds = 5;

inline constexpr std::array<std::string_view, kNumAggKinds> kAggNames = {"GCN", "GAT", "SAGE", "GIN", "GRAPHCONV", "MLP"};
inline constexpr std::array<std::string_view, kNumPoolKinds> kPoolNames = {
    "TOPKPOOL", "SAGPOOL", "ASAP", "HOPPOOL_1", "HOPPOOL_2", "HOPPOOL_3", "MLPPOOL", "GCPOOL", "GAPPOOL", "NONE"};
inline constexpr std::array<std::string_view, kNumReadoutKinds> kReadoutNames = {
    "GLOBAL_SORT", "GLOBAL_ATT", "SET2SET", "GLOBAL_MEAN", "GLOBAL_MAX", "GLOBAL_SUM", "ZERO"};
inline constexpr std::array<std::string_view, kNumMergeKinds> kMergeNames = {"M_LSTM", "M_CONCAT", "M_MAX", "M_MEAN",
                                                                             "M_SUM"};

std::string to_string(AggKind k);
std::string to_string(PoolKind k);
std::string to_string(ReadoutKind k);
std::string to_string(MergeKind k);

// Canonical upper-case names; throw ContractError on anything else.
AggKind parse_agg(std::string_view s);
PoolKind parse_pool(std::string_view s);
ReadoutKind parse_readout(std::string_view s);
MergeKind parse_merge(std::string_view s);

// Pooling kinds whose score function has learnable parameters; their
// selected features are gated by tanh(score).
constexpr bool pool_is_parameterized(PoolKind k) {
  return k == PoolKind::kTopK || k == PoolKind::kSag || k == PoolKind::kAsap || k == PoolKind::kMlp ||
         k == PoolKind::kGc || k == PoolKind::kGap;
}

constexpr int hop_order(PoolKind k) {
  switch (k) {
    case PoolKind::kHop1: return 1;
    case PoolKind::kHop2: return 2;
    case PoolKind::kHop3: return 3;
    default: return 0;
  }
}

enum class Activation { kRelu, kElu, kIdentity };

Activation parse_activation(std::string_view s);
std::string to_string(Activation a);

}  // namespace pas
