#include "pas/cli/commands.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include "pas/cli/run_config.hpp"
#include "pas/diffcore/tape.hpp"
#include "pas/graphdata/tu_format.hpp"
#include "pas/gradsuite.hpp"
#include "pas/search/search.hpp"

namespace pas::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
  std::optional<int> epochs;
  std::string ablation;
  // dataset overrides
  std::string tu_dir;
  std::string tu_name;
  std::string synthetic;
  std::optional<int> count;
  // command options
  std::string arch;
  std::optional<int> folds;
  std::optional<int> trials;
  std::string kind = "feature-sum";
  std::string name;
  int graphs = 20;
  bool corrupt_gradient = false;
};

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("PAS_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  std::uint64_t seed = 0;
  const char* end = v + std::char_traits<char>::length(v);
  auto [p, ec] = std::from_chars(v, end, seed);
  if (ec != std::errc() || p != end) throw ConfigError("PAS_SEED: expected an unsigned 64-bit integer, got '" + std::string(v) + "'");
  return seed;
}

// Config file, then PAS_SEED, then command-line flags.
RunConfig resolve(const Flags& f) {
  RunConfig c = f.config.empty() ? parse_run_config(json::object()) : load_run_config(f.config);
  if (!f.ablation.empty()) {
    json j = to_json(c);
    j["ablation"] = f.ablation;
    j.erase("pins");
    c = parse_run_config(j);
  }
  if (auto s = env_seed()) c.search.seed = *s;
  if (f.seed) c.search.seed = *f.seed;
  if (!f.out.empty()) c.out = f.out;
  if (f.threads) c.search.threads = *f.threads;
  if (f.epochs) c.search.epochs = *f.epochs;
  if (f.folds) c.folds = *f.folds;
  if (f.trials) c.trials = *f.trials;
  if (!f.arch.empty()) c.arch = f.arch;
  if (!f.tu_dir.empty() || !f.tu_name.empty()) {
    if (f.tu_dir.empty() || f.tu_name.empty()) throw ConfigError("--tu-dir and --tu-name must be given together");
    if (!f.synthetic.empty()) throw ConfigError("--synthetic conflicts with --tu-dir");
    DatasetSpec d;
    d.source = DatasetSpec::Source::kTu;
    d.dir = f.tu_dir;
    d.name = f.tu_name;
    c.dataset = d;
  } else if (!f.synthetic.empty()) {
    DatasetSpec d;
    try {
      d.kind = parse_synthetic_kind(f.synthetic);
    } catch (const ContractError& e) {
      throw ConfigError(std::string("--synthetic: ") + e.what());
    }
    d.seed = c.search.seed;
    c.dataset = d;
  }
  if (f.count) {
    if (!c.dataset || c.dataset->source != DatasetSpec::Source::kSynthetic) {
      throw ConfigError("--count applies only to synthetic datasets");
    }
    c.dataset->count = *f.count;
  }
  // Re-validate the merged result so flag values get the same checks.
  return parse_run_config(to_json(c));
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
  if (!out) throw Error("failed writing " + p.string());
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("arch: cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Everything a command needs: the resolved config, its data and output dir.
struct Run {
  std::string command;
  RunConfig cfg;
  Dataset ds;
  fs::path out;
  json inputs = json::object();
  std::vector<std::string> outputs;

  void write(const std::string& file, const std::string& text) {
    write_text(out / file, text);
    outputs.push_back(file);
  }
  void write(const std::string& file, const json& j) { write(file, j.dump(2) + "\n"); }

  void manifest() {
    json m = {
        {"manifest_version", 1},
        {"command", command},
        {"config", to_json(cfg)},
        {"seed", cfg.search.seed},
        {"inputs", inputs},
        {"content_hash", content_hash(inputs)},
        {"outputs", outputs},
    };
    write_json(out / "manifest.json", m);
  }
};

Run start(const std::string& command, const Flags& f) {
  Run run;
  run.command = command;
  run.cfg = resolve(f);
  if (!run.cfg.dataset) throw ConfigError("dataset: no dataset given (config key 'dataset' or --tu-dir/--synthetic)");
  if (run.cfg.out.empty()) throw ConfigError("out: no output directory given (--out or config key 'out')");
  run.out = run.cfg.out;
  std::error_code ec;
  fs::create_directories(run.out, ec);
  if (ec || !fs::is_directory(run.out)) throw ConfigError("out: cannot create directory " + run.out.string());
  run.ds = load_dataset(*run.cfg.dataset);
  run.inputs = hash_inputs(*run.cfg.dataset, run.ds);
  return run;
}

DerivedArch load_arch(Run& run) {
  if (run.cfg.arch.empty()) throw ConfigError("arch: no architecture file given (--arch or config key 'arch')");
  const std::string text = read_text(run.cfg.arch);
  run.inputs["arch:" + fs::path(run.cfg.arch).filename().string()] = git_blob_hash(text);
  try {
    return arch_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError("arch: " + run.cfg.arch + ": " + e.what());
  } catch (const ContractError& e) {
    throw ConfigError("arch: " + run.cfg.arch + ": " + e.what());
  }
}

int cmd_search(const Flags& f, std::ostream& out) {
  Run run = start("search", f);
  const SearchResult r = pas_search(run.ds, run.cfg.search);
  json alpha = json::object();
  for (const auto& [key, p] : r.alpha) {
    std::vector<double> row(p.value.data(), p.value.data() + p.value.size());
    alpha[key] = row;
  }
  run.write("arch.json", to_json(r.arch));
  run.write("search_report.csv", to_csv(r.report));
  run.write("summary.json", json{{"arch", to_json(r.arch)},
                                 {"describe", r.arch.describe()},
                                 {"epochs", r.report.epochs()},
                                 {"final_val_acc", r.report.val_acc.empty() ? 0.0 : r.report.val_acc.back()},
                                 {"alpha", alpha},
                                 {"wall_time_seconds", r.report.wall_time_seconds}});
  run.manifest();
  out << "arch: " << r.arch.describe() << "\n";
  out << "wrote " << run.out.string() << "\n";
  return kExitOk;
}

int cmd_train(const Flags& f, std::ostream& out) {
  Run run = start("train", f);
  const DerivedArch arch = load_arch(run);
  SearchConfig scfg = run.cfg.search;
  scfg.layers = arch.num_layers();
  const Split split = search_split(run.ds, scfg);
  TrainResult r = train_architecture(run.ds, split.train, split.val, arch, scfg);
  const ModelConfig mcfg = scfg.model_config(run.ds.feature_dim, run.ds.num_classes);
  const Metrics test = split.test.empty() ? Metrics{} : evaluate(run.ds, split.test, arch, r.params, mcfg, scfg.batch_size);
  run.write("train_report.csv", to_csv(r.report));
  run.write("summary.json", json{{"arch", to_json(arch)},
                                 {"best_epoch", r.report.best_epoch + 1},
                                 {"best_val_acc", r.report.best_val_acc},
                                 {"test_acc", test.accuracy},
                                 {"test_loss", test.loss},
                                 {"wall_time_seconds", r.report.wall_time_seconds}});
  run.manifest();
  out << "test_acc: " << fmt(test.accuracy) << "\n";
  out << "wrote " << run.out.string() << "\n";
  return kExitOk;
}

int cmd_eval(const Flags& f, std::ostream& out) {
  Run run = start("eval", f);
  const DerivedArch arch = load_arch(run);
  const CvResult cv = cross_validate(run.ds, arch, run.cfg.folds, run.cfg.search);
  std::string csv = "fold,train_acc,val_acc,test_acc\n";
  double tr = 0.0, va = 0.0;
  for (const FoldResult& fr : cv.folds) {
    csv += std::to_string(fr.fold + 1) + "," + fmt(fr.train_acc) + "," + fmt(fr.val_acc) + "," + fmt(fr.test_acc) + "\n";
    tr += fr.train_acc;
    va += fr.val_acc;
  }
  const double k = static_cast<double>(cv.folds.size());
  csv += "mean," + fmt(tr / k) + "," + fmt(va / k) + "," + fmt(cv.mean) + "\n";
  run.write("cv_results.csv", csv);
  run.write("summary.json", json{{"mean", cv.mean},
                                 {"std", cv.std},
                                 {"folds", cv.folds.size()},
                                 {"arch", to_json(arch)},
                                 {"wall_time_seconds", cv.wall_time_seconds}});
  run.manifest();
  out << "test_acc: " << fmt(cv.mean) << " +- " << fmt(cv.std) << "\n";
  out << "wrote " << run.out.string() << "\n";
  return kExitOk;
}

int cmd_random(const Flags& f, std::ostream& out) {
  Run run = start("random", f);
  const RandomSearchResult r = random_search(run.ds, run.cfg.search, run.cfg.trials);
  std::string csv = "trial,val_acc,val_loss,arch\n";
  for (std::size_t i = 0; i < r.trials.size(); ++i) {
    const RandomTrial& t = r.trials[i];
    csv += std::to_string(i + 1) + "," + fmt(t.val_acc) + "," + fmt(t.val_loss) + ",\"" + t.arch.describe() + "\"\n";
  }
  run.write("arch.json", to_json(r.best));
  run.write("random_trials.csv", csv);
  run.write("summary.json", json{{"arch", to_json(r.best)},
                                 {"describe", r.best.describe()},
                                 {"trials", r.trials.size()},
                                 {"wall_time_seconds", r.wall_time_seconds}});
  run.manifest();
  out << "arch: " << r.best.describe() << "\n";
  out << "wrote " << run.out.string() << "\n";
  return kExitOk;
}

int cmd_gendata(const Flags& f, std::ostream& out) {
  Flags rest = f;
  rest.count.reset();
  RunConfig c = resolve(rest);
  if (c.out.empty()) throw ConfigError("out: no output directory given (--out or config key 'out')");
  SyntheticKind kind;
  try {
    kind = parse_synthetic_kind(f.kind);
  } catch (const ContractError& e) {
    throw ConfigError(std::string("--kind: ") + e.what());
  }
  SyntheticParams p;
  p.count = f.count.value_or(200);
  if (p.count < 2) throw ConfigError("--count: must be at least 2");
  const std::string name = f.name.empty() ? to_string(kind) : f.name;
  const Dataset ds = gen_synthetic(kind, p, c.search.seed);
  write_tu_dataset(ds, c.out, name);
  out << "wrote " << ds.size() << " graphs to " << (fs::path(c.out) / name).string() << "_*.txt\n";
  return kExitOk;
}

int cmd_gradcheck(const Flags& f, std::ostream& out) {
  GradSuiteOptions opts;
  opts.graphs = f.graphs;
  if (auto s = env_seed()) opts.seed = *s;
  if (f.seed) opts.seed = *f.seed;
  if (opts.graphs < 1) throw ConfigError("--graphs: must be at least 1");
  testing::set_corrupt_tanh_gradient(f.corrupt_gradient);
  GradSuiteResult r;
  try {
    r = run_gradient_suite(opts, [&](const GradSuiteCase& c) {
      if (!c.passed) {
        out << "FAIL " << c.name << " graph " << c.graph << " (" << c.nodes << " nodes) rel " << fmt(c.max_rel_error)
            << " at " << c.worst_key << "\n";
      }
    });
  } catch (...) {
    testing::set_corrupt_tanh_gradient(false);
    throw;
  }
  testing::set_corrupt_tanh_gradient(false);
  out << (r.passed() ? "PASS" : "FAIL") << " gradient suite: " << r.cases.size() << " cases, max rel error "
      << fmt(r.max_rel_error()) << ", " << r.failures().size() << " failures\n";
  return r.passed() ? kExitOk : kExitFailure;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"Differentiable pooling-architecture search for graph classification", "pas"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", f.config, "JSON config file or a previous run's manifest.json");
  app.add_option("--seed", f.seed, "Seed (overrides PAS_SEED and the config)");
  app.add_option("--out", f.out, "Output directory");
  app.add_option("--threads", f.threads, "Worker threads for folds and trials");
  app.add_option("--epochs", f.epochs, "Training epochs");
  app.add_option("--ablation", f.ablation, "Ablation variant: PAS, PAS-Global, PAS-FR, PAS-RM, PAS-GCN, PAS-GAT");
  app.add_option("--tu-dir", f.tu_dir, "Directory holding a TU-format dataset");
  app.add_option("--tu-name", f.tu_name, "TU dataset name (file prefix)");
  app.add_option("--synthetic", f.synthetic, "Synthetic dataset kind: feature-sum, planted-clusters");
  app.add_option("--count", f.count, "Number of synthetic graphs");

  auto* search = app.add_subcommand("search", "Search an architecture; writes arch.json and search_report.csv");
  auto* train = app.add_subcommand("train", "Train an architecture on the search split");
  train->add_option("--arch", f.arch, "Architecture JSON (or config key 'arch')");
  auto* eval = app.add_subcommand("eval", "Cross-validate an architecture; writes cv_results.csv and summary.json");
  eval->add_option("--arch", f.arch, "Architecture JSON (or config key 'arch')");
  eval->add_option("--folds", f.folds, "Number of folds");
  auto* random = app.add_subcommand("random", "Random-search baseline");
  random->add_option("--trials", f.trials, "Number of sampled architectures");
  auto* gendata = app.add_subcommand("gendata", "Write a synthetic dataset in TU format");
  gendata->add_option("--kind", f.kind, "feature-sum or planted-clusters");
  gendata->add_option("--name", f.name, "Dataset name (defaults to the kind)");
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every differentiable component");
  gradcheck->add_option("--graphs", f.graphs, "Random graphs per component");
  gradcheck->add_flag("--corrupt-gradient", f.corrupt_gradient, "Test hook: break one backward rule");

  // Name a mistyped subcommand instead of reporting a missing one. Every
  // global option takes a value.
  for (std::size_t i = 0; i < args.size();) {
    const std::string& a = args[i];
    if (a.rfind("-", 0) == 0) {
      if (a == "-h" || a == "--help") break;
      i += a.find('=') == std::string::npos ? 2 : 1;
      continue;
    }
    if (!app.get_subcommand_no_throw(a)) {
      err << "pas: unknown subcommand '" << a << "'\n";
      return kExitUsage;
    }
    break;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "pas: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (search->parsed()) return cmd_search(f, out);
    if (train->parsed()) return cmd_train(f, out);
    if (eval->parsed()) return cmd_eval(f, out);
    if (random->parsed()) return cmd_random(f, out);
    if (gendata->parsed()) return cmd_gendata(f, out);
    if (gradcheck->parsed()) return cmd_gradcheck(f, out);
  } catch (const ConfigError& e) {
    err << "pas: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "pas: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace pas::cli
