#include "pas/cli/run_config.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "pas/graphdata/tu_format.hpp"
#include "pas/kinds.hpp"
#include "pas/supernet/arch.hpp"

namespace pas::cli {
namespace {

using nlohmann::json;

// Strict reader over one JSON object: every key must be consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "expected an object");
  }

  const json* find(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  void read(const std::string& key, T& out) {
    const json* v = find(key);
    if (!v) return;
    out = convert<T>(*v, key_path(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("config: unknown key '" + key_path(it.key()) + "'");
    }
  }

  template <typename T>
  static T convert(const json& v, const std::string& key) {
    auto bad = [&](const char* what) { return ConfigError("config key '" + key + "': expected " + what); };
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw bad("true or false");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw bad("a non-negative integer");
      }
      return v.get<std::uint64_t>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw bad("an integer");
      return v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw bad("a number");
      return v.get<T>();
    } else {
      if (!v.is_string()) throw bad("a string");
      return v.get<std::string>();
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config: " : "config key '" + path_ + "': "; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Kind, typename Parse>
void read_pin_list(Reader& r, const std::string& key, std::vector<std::optional<Kind>>& out, Parse parse) {
  const json* v = r.find(key);
  if (!v) return;
  const std::string path = r.key_path(key);
  if (!v->is_array()) throw ConfigError("config key '" + path + "': expected an array of kind names or null");
  for (std::size_t i = 0; i < v->size(); ++i) {
    const json& e = (*v)[i];
    const std::string at = path + "[" + std::to_string(i) + "]";
    if (i >= out.size()) out.resize(i + 1);
    if (e.is_null()) continue;
    try {
      out[i] = parse(Reader::convert<std::string>(e, at));
    } catch (const ContractError& ex) {
      throw ConfigError("config key '" + at + "': " + ex.what());
    }
  }
}

template <typename Kind>
json pin_list_json(const std::vector<std::optional<Kind>>& pins) {
  json out = json::array();
  for (const auto& p : pins) out.push_back(p ? json(to_string(*p)) : json(nullptr));
  return out;
}

DatasetSpec parse_dataset(const json& j) {
  Reader r(j, "dataset");
  const json* tu = r.find("tu");
  const json* syn = r.find("synthetic");
  r.finish();
  if ((tu != nullptr) == (syn != nullptr)) {
    throw ConfigError("config key 'dataset': exactly one of 'tu' or 'synthetic' is required");
  }
  DatasetSpec spec;
  if (tu) {
    spec.source = DatasetSpec::Source::kTu;
    Reader t(*tu, "dataset.tu");
    std::string dir;
    t.read("dir", dir);
    t.read("name", spec.name);
    t.finish();
    if (dir.empty() || spec.name.empty()) throw ConfigError("config key 'dataset.tu': 'dir' and 'name' are required");
    spec.dir = dir;
  } else {
    spec.source = DatasetSpec::Source::kSynthetic;
    Reader s(*syn, "dataset.synthetic");
    std::string kind = to_string(spec.kind);
    s.read("kind", kind);
    s.read("count", spec.count);
    s.read("seed", spec.seed);
    s.finish();
    try {
      spec.kind = parse_synthetic_kind(kind);
    } catch (const ContractError& e) {
      throw ConfigError(std::string("config key 'dataset.synthetic.kind': ") + e.what());
    }
    if (spec.count < 2) throw ConfigError("config key 'dataset.synthetic.count': must be at least 2");
  }
  return spec;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha1_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha1(), nullptr) != 1) {
    throw Error("SHA-1 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  RunConfig c;
  SearchConfig& s = c.search;
  Reader r(j, "");
  r.read("layers", s.layers);
  r.read("hidden", s.hidden);
  r.read("pool_ratio", s.pool_ratio);
  r.read("tau", s.tau);
  r.read("epochs", s.epochs);
  r.read("batch_size", s.batch_size);
  r.read("lr_w", s.lr_w);
  r.read("lr_alpha", s.lr_alpha);
  r.read("seed", s.seed);
  r.read("search_repeats", s.search_repeats);
  r.read("readout0_after_aggregation", s.readout0_after_aggregation);
  r.read("threads", s.threads);
  r.read("folds", c.folds);
  r.read("trials", c.trials);
  r.read("arch", c.arch);
  r.read("ablation", c.ablation);
  r.read("out", c.out);
  if (const json* v = r.find("split")) {
    if (!v->is_array() || v->size() != 3) throw ConfigError("config key 'split': expected [train, val, test] fractions");
    for (std::size_t i = 0; i < 3; ++i) s.split[i] = Reader::convert<double>((*v)[i], "split[" + std::to_string(i) + "]");
  }
  if (const json* v = r.find("activation")) {
    try {
      s.activation = parse_activation(Reader::convert<std::string>(*v, "activation"));
    } catch (const ContractError& e) {
      throw ConfigError(std::string("config key 'activation': ") + e.what());
    }
  }
  if (const json* v = r.find("dataset")) c.dataset = parse_dataset(*v);
  const json* pins = r.find("pins");
  r.finish();

  if (s.layers < 1) throw ConfigError("config key 'layers': must be at least 1");
  try {
    s.pins = ablation_pins(c.ablation, s.layers);
  } catch (const ContractError& e) {
    throw ConfigError(std::string("config key 'ablation': ") + e.what());
  }
  if (pins) {
    Reader p(*pins, "pins");
    read_pin_list(p, "agg", s.pins.agg, parse_agg);
    read_pin_list(p, "pool", s.pins.pool, parse_pool);
    read_pin_list(p, "readout", s.pins.readout, parse_readout);
    if (const json* m = p.find("merge"); m && !m->is_null()) {
      try {
        s.pins.merge = parse_merge(Reader::convert<std::string>(*m, "pins.merge"));
      } catch (const ContractError& e) {
        throw ConfigError(std::string("config key 'pins.merge': ") + e.what());
      }
    }
    p.finish();
  }
  try {
    s.validate();
  } catch (const ContractError& e) {
    throw ConfigError(std::string("config key ") + e.what());
  }
  if (c.folds < 2) throw ConfigError("config key 'folds': must be at least 2");
  if (c.trials < 1) throw ConfigError("config key 'trials': must be at least 1");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError&) {
    throw ConfigError("config: cannot read " + path.string());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + " is not valid JSON: " + e.what());
  }
  if (j.is_object() && j.contains("manifest_version")) {
    if (!j.contains("config")) throw ConfigError("config: manifest " + path.string() + " has no 'config'");
    return parse_run_config(j.at("config"));
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& c) {
  const SearchConfig& s = c.search;
  json j = {
      {"layers", s.layers},
      {"hidden", s.hidden},
      {"pool_ratio", s.pool_ratio},
      {"tau", s.tau},
      {"epochs", s.epochs},
      {"batch_size", s.batch_size},
      {"lr_w", s.lr_w},
      {"lr_alpha", s.lr_alpha},
      {"seed", s.seed},
      {"split", s.split},
      {"search_repeats", s.search_repeats},
      {"activation", to_string(s.activation)},
      {"readout0_after_aggregation", s.readout0_after_aggregation},
      {"threads", s.threads},
      {"ablation", c.ablation},
      {"folds", c.folds},
      {"trials", c.trials},
      {"pins",
       {{"agg", pin_list_json(s.pins.agg)},
        {"pool", pin_list_json(s.pins.pool)},
        {"readout", pin_list_json(s.pins.readout)},
        {"merge", s.pins.merge ? json(to_string(*s.pins.merge)) : json(nullptr)}}},
  };
  if (!c.arch.empty()) j["arch"] = c.arch;
  if (!c.out.empty()) j["out"] = c.out;
  if (c.dataset) {
    const DatasetSpec& d = *c.dataset;
    if (d.source == DatasetSpec::Source::kTu) {
      j["dataset"] = {{"tu", {{"dir", d.dir.string()}, {"name", d.name}}}};
    } else {
      j["dataset"] = {{"synthetic", {{"kind", to_string(d.kind)}, {"count", d.count}, {"seed", d.seed}}}};
    }
  }
  return j;
}

Dataset load_dataset(const DatasetSpec& spec) {
  if (spec.source == DatasetSpec::Source::kTu) return load_tu_dataset(spec.dir, spec.name);
  SyntheticParams p;
  p.count = spec.count;
  return gen_synthetic(spec.kind, p, spec.seed);
}

std::string git_blob_hash(std::string_view content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob.append(content);
  return sha1_hex(blob);
}

json hash_inputs(const DatasetSpec& spec, const Dataset& ds) {
  json files = json::object();
  if (spec.source == DatasetSpec::Source::kTu) {
    for (const char* suffix :
         {"_A.txt", "_graph_indicator.txt", "_graph_labels.txt", "_node_labels.txt", "_node_attributes.txt"}) {
      const auto p = spec.dir / (spec.name + suffix);
      if (std::filesystem::exists(p)) files[p.filename().string()] = git_blob_hash(read_file(p));
    }
    return files;
  }
  std::ostringstream text;
  char buf[32];
  for (const Graph& g : ds.graphs) {
    text << "graph " << g.num_nodes() << ' ' << g.label << '\n';
    for (Eigen::Index i = 0; i < g.num_nodes(); ++i) {
      for (Eigen::Index k = 0; k < g.feat.cols(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", g.feat(i, k));
        text << (k ? " " : "") << buf;
      }
      text << '\n';
      for (Eigen::Index j = 0; j < g.num_nodes(); ++j) {
        if (g.adj(i, j) != 0.0) text << i << ' ' << j << '\n';
      }
    }
  }
  files["synthetic:" + to_string(spec.kind)] = git_blob_hash(text.str());
  return files;
}

std::string content_hash(const json& files) {
  std::string listing;
  for (auto it = files.begin(); it != files.end(); ++it) listing += it.key() + ' ' + it.value().get<std::string>() + '\n';
  return sha1_hex(listing);
}

}  // namespace pas::cli
