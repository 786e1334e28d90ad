#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pas/cli/commands.hpp"
#include "pas/cli/run_config.hpp"
#include "pas/graphdata/tu_format.hpp"
#include "pas/supernet/arch.hpp"

namespace pas::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("pas_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv("PAS_SEED");
  }
  void TearDown() override {
    fs::remove_all(dir_);
    unsetenv("PAS_SEED");
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  fs::path write_config(const json& j, const std::string& name = "c.json") {
    std::ofstream(path(name)) << j.dump();
    return path(name);
  }

  static json small_config() {
    return {{"epochs", 2},
            {"hidden", 4},
            {"batch_size", 16},
            {"dataset", {{"synthetic", {{"kind", "feature-sum"}, {"count", 40}, {"seed", 1}}}}}};
  }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run_command(args, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, SearchWritesParseableArchitecture) {
  const auto cfg = write_config(small_config());
  ASSERT_EQ(run({"search", "--config", cfg.string(), "--out", path("run").string()}), kExitOk) << err_.str();
  const DerivedArch arch = arch_from_json(json::parse(slurp(path("run/arch.json"))));
  EXPECT_NO_THROW(arch.validate());
  EXPECT_EQ(arch.num_layers(), 2);
  const std::string csv = slurp(path("run/search_report.csv"));
  EXPECT_EQ(csv.rfind("epoch,train_loss,val_loss,val_acc\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_TRUE(fs::exists(path("run/manifest.json")));
  EXPECT_TRUE(fs::exists(path("run/summary.json")));
}

TEST_F(CliTest, ManifestRerunReproducesCsvs) {
  const auto cfg = write_config(small_config());
  ASSERT_EQ(run({"search", "--config", cfg.string(), "--seed", "5", "--out", path("a").string()}), kExitOk);
  // The manifest carries the seed; the rerun passes no --seed.
  ASSERT_EQ(run({"search", "--config", path("a/manifest.json").string(), "--out", path("b").string()}), kExitOk)
      << err_.str();
  EXPECT_EQ(slurp(path("a/search_report.csv")), slurp(path("b/search_report.csv")));
  EXPECT_EQ(slurp(path("a/arch.json")), slurp(path("b/arch.json")));

  const std::string arch = path("a/arch.json").string();
  ASSERT_EQ(run({"eval", "--config", cfg.string(), "--arch", arch, "--folds", "2", "--out", path("e1").string()}),
            kExitOk);
  ASSERT_EQ(run({"eval", "--config", path("e1/manifest.json").string(), "--out", path("e2").string()}), kExitOk)
      << err_.str();
  EXPECT_EQ(slurp(path("e1/cv_results.csv")), slurp(path("e2/cv_results.csv")));

  const json m1 = json::parse(slurp(path("e1/manifest.json")));
  const json m2 = json::parse(slurp(path("e2/manifest.json")));
  EXPECT_EQ(m1.at("content_hash"), m2.at("content_hash"));
  EXPECT_EQ(m1.at("seed"), m2.at("seed"));
}

TEST_F(CliTest, ManifestHashTracksInputs) {
  json c = small_config();
  ASSERT_EQ(run({"search", "--config", write_config(c).string(), "--out", path("a").string(), "--epochs", "1"}), kExitOk);
  c["dataset"]["synthetic"]["seed"] = 2;
  ASSERT_EQ(run({"search", "--config", write_config(c).string(), "--out", path("b").string(), "--epochs", "1"}), kExitOk);
  const json ma = json::parse(slurp(path("a/manifest.json")));
  const json mb = json::parse(slurp(path("b/manifest.json")));
  EXPECT_NE(ma.at("content_hash"), mb.at("content_hash"));
  EXPECT_EQ(ma.at("content_hash"), content_hash(ma.at("inputs")));
}

TEST_F(CliTest, EvalWritesOneRowPerFoldPlusSummary) {
  const auto cfg = write_config(small_config());
  ASSERT_EQ(run({"search", "--config", cfg.string(), "--out", path("s").string(), "--epochs", "1"}), kExitOk);
  ASSERT_EQ(run({"eval", "--config", cfg.string(), "--arch", path("s/arch.json").string(), "--folds", "10", "--out",
                 path("e").string(), "--epochs", "1", "--threads", "4"}),
            kExitOk)
      << err_.str();
  std::istringstream csv(slurp(path("e/cv_results.csv")));
  std::vector<std::string> lines;
  for (std::string l; std::getline(csv, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 12u);
  EXPECT_EQ(lines.front(), "fold,train_acc,val_acc,test_acc");
  EXPECT_EQ(lines[1].rfind("1,", 0), 0u);
  EXPECT_EQ(lines[10].rfind("10,", 0), 0u);
  EXPECT_EQ(lines.back().rfind("mean,", 0), 0u);

  const json s = json::parse(slurp(path("e/summary.json")));
  for (const char* key : {"mean", "std", "folds", "arch", "wall_time_seconds"}) EXPECT_TRUE(s.contains(key)) << key;
  EXPECT_EQ(s.at("folds"), 10);
  EXPECT_EQ(arch_from_json(s.at("arch")), arch_from_json(json::parse(slurp(path("s/arch.json")))));
}

TEST_F(CliTest, TrainAndRandomWriteReports) {
  const auto cfg = write_config(small_config());
  ASSERT_EQ(run({"random", "--config", cfg.string(), "--trials", "3", "--out", path("r").string()}), kExitOk)
      << err_.str();
  const std::string trials = slurp(path("r/random_trials.csv"));
  EXPECT_EQ(std::count(trials.begin(), trials.end(), '\n'), 4);
  ASSERT_EQ(run({"train", "--config", cfg.string(), "--arch", path("r/arch.json").string(), "--out",
                 path("t").string()}),
            kExitOk)
      << err_.str();
  const std::string report = slurp(path("t/train_report.csv"));
  EXPECT_EQ(std::count(report.begin(), report.end(), '\n'), 3);
  const json s = json::parse(slurp(path("t/summary.json")));
  EXPECT_GE(s.at("test_acc").get<double>(), 0.0);
  EXPECT_LE(s.at("test_acc").get<double>(), 1.0);
}

TEST_F(CliTest, GendataRoundTripsThroughTuLoader) {
  ASSERT_EQ(run({"gendata", "--kind", "planted-clusters", "--count", "12", "--seed", "4", "--name", "pc", "--out",
                 path("d").string()}),
            kExitOk)
      << err_.str();
  SyntheticParams p;
  p.count = 12;
  const Dataset expected = gen_synthetic(SyntheticKind::kPlantedClusters, p, 4);
  const Dataset loaded = load_tu_dataset(path("d"), "pc");
  ASSERT_EQ(loaded.size(), expected.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) EXPECT_EQ(loaded.graphs[i], expected.graphs[i]) << i;

  ASSERT_EQ(run({"search", "--tu-dir", path("d").string(), "--tu-name", "pc", "--epochs", "1", "--out",
                 path("s").string()}),
            kExitOk)
      << err_.str();
  const json m = json::parse(slurp(path("s/manifest.json")));
  EXPECT_EQ(m.at("inputs").at("pc_A.txt"), git_blob_hash(slurp(path("d/pc_A.txt"))));
}

TEST_F(CliTest, GradcheckExitReflectsSuiteOutcome) {
  EXPECT_EQ(run({"gradcheck", "--graphs", "1"}), kExitOk) << out_.str();
  EXPECT_NE(out_.str().find("PASS"), std::string::npos);
  EXPECT_NE(run({"gradcheck", "--graphs", "1", "--corrupt-gradient"}), kExitOk);
  EXPECT_NE(out_.str().find("FAIL"), std::string::npos);
  // The hook is switched off again afterwards.
  EXPECT_EQ(run({"gradcheck", "--graphs", "1"}), kExitOk);
}

TEST_F(CliTest, UsageErrorsExitTwoAndNameTheKey) {
  json c = small_config();
  c["lr_alpah"] = 0.1;
  EXPECT_EQ(run({"search", "--config", write_config(c).string(), "--out", path("x").string()}), kExitUsage);
  EXPECT_NE(err_.str().find("lr_alpah"), std::string::npos) << err_.str();

  c = small_config();
  c["dataset"]["synthetic"]["kidn"] = "feature-sum";
  EXPECT_EQ(run({"search", "--config", write_config(c).string(), "--out", path("x").string()}), kExitUsage);
  EXPECT_NE(err_.str().find("dataset.synthetic.kidn"), std::string::npos) << err_.str();

  c = small_config();
  c["epochs"] = "ten";
  EXPECT_EQ(run({"search", "--config", write_config(c).string(), "--out", path("x").string()}), kExitUsage);
  EXPECT_NE(err_.str().find("epochs"), std::string::npos) << err_.str();

  c = small_config();
  c["pins"] = {{"pool", {nullptr, "NOPOOL"}}};
  EXPECT_EQ(run({"search", "--config", write_config(c).string(), "--out", path("x").string()}), kExitUsage);
  EXPECT_NE(err_.str().find("pins.pool[1]"), std::string::npos) << err_.str();

  EXPECT_EQ(run({"serach", "--out", path("x").string()}), kExitUsage);
  EXPECT_NE(err_.str().find("serach"), std::string::npos);
  EXPECT_EQ(run({}), kExitUsage);
  EXPECT_EQ(run({"search", "--bogus"}), kExitUsage);
  EXPECT_NE(err_.str().find("--bogus"), std::string::npos);
  EXPECT_EQ(run({"eval", "--synthetic", "feature-sum", "--out", path("x").string()}), kExitUsage);  // --arch missing
  EXPECT_EQ(run({"search", "--config", path("absent.json").string()}), kExitUsage);

  std::ofstream(path("broken.json")) << "{\"epochs\": ";
  EXPECT_EQ(run({"search", "--config", path("broken.json").string()}), kExitUsage);
}

TEST_F(CliTest, RuntimeFailuresExitOne) {
  EXPECT_EQ(run({"search", "--tu-dir", path("nowhere").string(), "--tu-name", "X", "--out", path("x").string()}),
            kExitFailure);
  EXPECT_NE(err_.str().find("X_A.txt"), std::string::npos) << err_.str();
}

TEST_F(CliTest, SeedPrecedenceIsFlagThenEnvThenConfig) {
  json c = small_config();
  c["seed"] = 11;
  c["epochs"] = 1;
  const auto cfg = write_config(c);
  auto seed_of = [&](const std::string& out) {
    return json::parse(slurp(path(out + "/manifest.json"))).at("seed").get<std::uint64_t>();
  };
  ASSERT_EQ(run({"search", "--config", cfg.string(), "--out", path("a").string()}), kExitOk);
  EXPECT_EQ(seed_of("a"), 11u);
  setenv("PAS_SEED", "22", 1);
  ASSERT_EQ(run({"search", "--config", cfg.string(), "--out", path("b").string()}), kExitOk);
  EXPECT_EQ(seed_of("b"), 22u);
  ASSERT_EQ(run({"search", "--config", cfg.string(), "--seed", "18446744073709551615", "--out", path("c").string()}),
            kExitOk);
  EXPECT_EQ(seed_of("c"), 18446744073709551615ull);
  setenv("PAS_SEED", "-1", 1);
  EXPECT_EQ(run({"search", "--config", cfg.string(), "--out", path("d").string()}), kExitUsage);
  EXPECT_NE(err_.str().find("PAS_SEED"), std::string::npos);
}

TEST(RunConfig, ResolvedJsonRoundTrips) {
  json j = {{"layers", 3},
            {"ablation", "PAS-FR"},
            {"pins", {{"agg", {nullptr, "GAT"}}, {"merge", "M_MAX"}}},
            {"split", {0.6, 0.2, 0.2}},
            {"activation", "elu"},
            {"seed", 9},
            {"out", "r"},
            {"dataset", {{"tu", {{"dir", "data"}, {"name", "PROTEINS"}}}}}};
  const RunConfig c = parse_run_config(j);
  EXPECT_EQ(c.search.pins.agg.size(), 2u);
  EXPECT_FALSE(c.search.pins.agg[0].has_value());
  EXPECT_EQ(c.search.pins.agg[1], AggKind::kGat);
  EXPECT_EQ(c.search.pins.merge, MergeKind::kMax);
  // The ablation's readout pins survive alongside the explicit ones.
  ASSERT_EQ(c.search.pins.readout.size(), 4u);
  for (const auto& r : c.search.pins.readout) EXPECT_EQ(r, ReadoutKind::kMean);

  const json resolved = to_json(c);
  EXPECT_EQ(to_json(parse_run_config(resolved)), resolved);
}

TEST(RunConfig, RejectsInvalidCombinations) {
  EXPECT_THROW(parse_run_config({{"dataset", {{"tu", {{"dir", "d"}, {"name", "n"}}}, {"synthetic", json::object()}}}}),
               ConfigError);
  EXPECT_THROW(parse_run_config({{"dataset", json::object()}}), ConfigError);
  EXPECT_THROW(parse_run_config({{"lr_w", -1.0}}), ConfigError);
  EXPECT_THROW(parse_run_config({{"split", {0.5, 0.5}}}), ConfigError);
  EXPECT_THROW(parse_run_config({{"folds", 1}}), ConfigError);
  EXPECT_THROW(parse_run_config({{"ablation", "PAS-XYZ"}}), ConfigError);
  EXPECT_THROW(parse_run_config({{"seed", -4}}), ConfigError);
  EXPECT_THROW(parse_run_config(json::array()), ConfigError);
}

TEST(GitBlobHash, MatchesGitHashObject) {
  // Reference values from `git hash-object`.
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

}  // namespace
}  // namespace pas::cli
