#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "pas/error.hpp"
#include "pas/graphdata/graph.hpp"
#include "pas/graphdata/synthetic.hpp"
#include "pas/search/config.hpp"

namespace pas::cli {

// Malformed configuration or command line; the message names the key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct DatasetSpec {
  enum class Source { kTu, kSynthetic };
  Source source = Source::kSynthetic;
  // TU format
  std::filesystem::path dir;
  std::string name;
  // synthetic
  SyntheticKind kind = SyntheticKind::kFeatureSum;
  int count = 200;
  std::uint64_t seed = 0;
};

struct RunConfig {
  SearchConfig search;
  std::optional<DatasetSpec> dataset;
  // Ablation variant whose pins were applied before the explicit pins.
  std::string ablation = "PAS";
  int folds = 10;
  int trials = 10;
  std::string arch;
  std::string out;
};

// Flat JSON keys: the SearchConfig fields (layers, hidden, pool_ratio, tau,
// epochs, batch_size, lr_w, lr_alpha, seed, split, search_repeats,
// activation, readout0_after_aggregation, threads), pins {agg, pool,
// readout, merge} (null = unpinned), ablation, dataset ({"tu": {dir, name}}
// or {"synthetic": {kind, count, seed}}), folds, trials, arch, out. Unknown keys
// and wrong types throw ConfigError.
RunConfig parse_run_config(const nlohmann::json& j);

// Reads a config file, or the "config" object of a manifest written by a
// previous run.
RunConfig load_run_config(const std::filesystem::path& path);

// Fully resolved config; parse_run_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& c);

Dataset load_dataset(const DatasetSpec& spec);

// Hex SHA-1 of "blob <size>\0" + content, as `git hash-object` computes it.
std::string git_blob_hash(std::string_view content);

// {name: blob hash} of the dataset inputs. For TU data these are the
// dataset's text files; synthetic data is hashed through a canonical text
// serialisation of the generated graphs.
nlohmann::json hash_inputs(const DatasetSpec& spec, const Dataset& ds);

// Tree-style hash over sorted "name hash" lines of a {name: blob hash} map.
std::string content_hash(const nlohmann::json& files);

}  // namespace pas::cli
