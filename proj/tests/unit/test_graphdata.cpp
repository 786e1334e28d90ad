#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "pas/error.hpp"
#include "pas/graphdata/batch.hpp"
#include "pas/graphdata/splits.hpp"
#include "pas/graphdata/synthetic.hpp"
#include "pas/graphdata/tu_format.hpp"
#include "test_support.hpp"

namespace pas {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("pas_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  void write(const std::string& file, const std::string& text) const { std::ofstream(path_ / file) << text; }

 private:
  fs::path path_;
};

void write_fixture(const TempDir& dir) {
  dir.write("FX_A.txt", "1, 2\n2, 1\n3, 4\n4, 3\n");
  dir.write("FX_graph_indicator.txt", "1\n1\n2\n2\n");
  dir.write("FX_graph_labels.txt", "1\n2\n");
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

TEST(TuFormat, HandBuiltFixture) {
  TempDir dir;
  write_fixture(dir);
  const Dataset ds = load_tu_dataset(dir.path(), "FX");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.num_classes, 2);
  const Matrix edge = (Matrix(2, 2) << 0, 1, 1, 0).finished();
  for (const Graph& g : ds.graphs) {
    EXPECT_EQ(g.num_nodes(), 2);
    EXPECT_EQ(g.adj, edge);
  }
  EXPECT_EQ(ds.graphs[0].label, 0);
  EXPECT_EQ(ds.graphs[1].label, 1);
  // No node labels or attributes: constant single feature.
  EXPECT_EQ(ds.feature_dim, 1);
  EXPECT_EQ(ds.graphs[0].feat, Matrix::Ones(2, 1));
}

TEST(TuFormat, SymmetrizesAndDropsSelfLoops) {
  TempDir dir;
  dir.write("S_A.txt", "1, 2\n2, 3\n3, 3\n");
  dir.write("S_graph_indicator.txt", "1\n1\n1\n");
  dir.write("S_graph_labels.txt", "0\n");
  const Dataset ds = load_tu_dataset(dir.path(), "S");
  EXPECT_EQ(ds.graphs[0].adj, test::path_graph(3));
}

TEST(TuFormat, NodeLabelsOneHotAscendingThenAttributes) {
  TempDir dir;
  write_fixture(dir);
  dir.write("FX_node_labels.txt", "7\n3\n3\n5\n");
  dir.write("FX_node_attributes.txt", "0.5, 1\n1.5, 2\n2.5, 3\n3.5, 4\n");
  const Dataset ds = load_tu_dataset(dir.path(), "FX");
  EXPECT_EQ(ds.feature_dim, 5);
  EXPECT_EQ(ds.graphs[0].feat, (Matrix(2, 5) << 0, 0, 1, 0.5, 1, 1, 0, 0, 1.5, 2).finished());
  EXPECT_EQ(ds.graphs[1].feat, (Matrix(2, 5) << 1, 0, 0, 2.5, 3, 0, 1, 0, 3.5, 4).finished());
}

TEST(TuFormat, GraphLabelsRemappedToContiguousRange) {
  TempDir dir;
  write_fixture(dir);
  dir.write("FX_graph_labels.txt", "-1\n10\n");
  const Dataset ds = load_tu_dataset(dir.path(), "FX");
  EXPECT_EQ(ds.labels(), (std::vector<int>{0, 1}));
}

TEST(TuFormat, MissingAdjacencyFileNamed) {
  TempDir dir;
  write_fixture(dir);
  fs::remove(dir.path() / "FX_A.txt");
  EXPECT_NE(error_of([&] { load_tu_dataset(dir.path(), "FX"); }).find("FX_A.txt"), std::string::npos);
}

TEST(TuFormat, EdgeAcrossGraphsReportsFileAndLine) {
  TempDir dir;
  write_fixture(dir);
  dir.write("FX_A.txt", "1, 2\n2, 3\n");
  const std::string msg = error_of([&] { load_tu_dataset(dir.path(), "FX"); });
  EXPECT_NE(msg.find("FX_A.txt:2"), std::string::npos) << msg;
}

TEST(TuFormat, IndicatorGapReportsLine) {
  TempDir dir;
  write_fixture(dir);
  dir.write("FX_graph_indicator.txt", "1\n1\n3\n3\n");
  const std::string msg = error_of([&] { load_tu_dataset(dir.path(), "FX"); });
  EXPECT_NE(msg.find("FX_graph_indicator.txt:3"), std::string::npos) << msg;
}

TEST(TuFormat, MalformedNumberReportsLine) {
  TempDir dir;
  write_fixture(dir);
  dir.write("FX_A.txt", "1, 2\n2, x\n");
  EXPECT_NE(error_of([&] { load_tu_dataset(dir.path(), "FX"); }).find("FX_A.txt:2"), std::string::npos);
}

TEST(TuFormat, LabelCountMismatch) {
  TempDir dir;
  write_fixture(dir);
  dir.write("FX_graph_labels.txt", "1\n");
  EXPECT_THROW(load_tu_dataset(dir.path(), "FX"), DataError);
}

TEST(TuFormat, RoundTripPreservesGraphs) {
  TempDir dir;
  const Dataset ds = gen_synthetic(SyntheticKind::kFeatureSum, {40}, 5);
  write_tu_dataset(ds, dir.path(), "RT");
  const Dataset back = load_tu_dataset(dir.path(), "RT");
  ASSERT_EQ(back.size(), ds.size());
  EXPECT_EQ(back.num_classes, ds.num_classes);
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_TRUE(back.graphs[i] == ds.graphs[i]) << "graph " << i;
  // A second round trip is a fixed point as well.
  write_tu_dataset(back, dir.path(), "RT2");
  const Dataset again = load_tu_dataset(dir.path(), "RT2");
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_TRUE(again.graphs[i] == ds.graphs[i]);
}

TEST(TuFormat, ProteinsStatistics) {
  const char* dir = std::getenv("PAS_PROTEINS_DIR");
  if (dir == nullptr) GTEST_SKIP() << "PAS_PROTEINS_DIR not set";
  const Dataset ds = load_tu_dataset(dir, "PROTEINS");
  EXPECT_EQ(ds.size(), 1113u);
  EXPECT_EQ(ds.num_classes, 2);
  EXPECT_EQ(ds.feature_dim, 3);
}

TEST(Batch, TwoAndThreeNodes) {
  Rng rng(1);
  std::vector<Graph> gs{test::random_graph(rng, 2, 3, 1.0), test::random_graph(rng, 3, 3, 1.0, 1)};
  const GraphBatch b = make_batch(gs);
  EXPECT_EQ(b.num_nodes(), 5);
  EXPECT_EQ(b.membership, (std::vector<int>{0, 0, 1, 1, 1}));
  EXPECT_EQ(b.mask, Matrix::Ones(5, 1));
  EXPECT_EQ(b.labels, (std::vector<int>{0, 1}));
  const Matrix a = b.adjacency();
  EXPECT_EQ(a.rows(), 5);
  EXPECT_EQ(a.topLeftCorner(2, 2), gs[0].adj);
  EXPECT_EQ(a.bottomRightCorner(3, 3), gs[1].adj);
  EXPECT_EQ(a.topRightCorner(2, 3), Matrix::Zero(2, 3));
  EXPECT_EQ(a.bottomLeftCorner(3, 2), Matrix::Zero(3, 2));
}

TEST(Batch, SingleGraphAdjacencyUnchanged) {
  Rng rng(2);
  std::vector<Graph> gs{test::random_graph(rng, 6, 2)};
  EXPECT_EQ(make_batch(gs).adjacency(), gs[0].adj);
}

TEST(Batch, Errors) {
  Rng rng(3);
  std::vector<Graph> none;
  EXPECT_THROW(make_batch(none), ContractError);
  std::vector<Graph> mixed{test::random_graph(rng, 3, 2), test::random_graph(rng, 3, 4)};
  EXPECT_THROW(make_batch(mixed), ContractError);
}

TEST(Batch, ExtractRecoversEveryGraph) {
  Rng rng(4);
  const Dataset ds = test::random_dataset(rng, 12, 3, 3, 1, 9);
  std::vector<int> idx{5, 0, 11, 3, 3};
  const GraphBatch b = make_batch(ds, idx);
  for (int g = 0; g < b.num_graphs(); ++g) EXPECT_TRUE(b.extract(g) == ds.graphs[static_cast<std::size_t>(idx[static_cast<std::size_t>(g)])]);
}

Dataset labelled(const std::vector<int>& labels) {
  Dataset ds;
  ds.feature_dim = 1;
  int classes = 0;
  for (int l : labels) {
    ds.graphs.push_back(Graph{Matrix::Zero(1, 1), Matrix::Ones(1, 1), l});
    classes = std::max(classes, l + 1);
  }
  ds.num_classes = classes;
  return ds;
}

TEST(Kfold, SixAndFourSplitInHalves) {
  const Dataset ds = labelled({0, 0, 0, 0, 0, 0, 1, 1, 1, 1});
  const auto folds = stratified_kfold(ds, 2, 7);
  ASSERT_EQ(folds.size(), 2u);
  for (const Fold& f : folds) {
    int c0 = 0, c1 = 0;
    for (int i : f.test) (ds.graphs[static_cast<std::size_t>(i)].label == 0 ? c0 : c1)++;
    EXPECT_EQ(c0, 3);
    EXPECT_EQ(c1, 2);
  }
}

void expect_partition_and_bound(const Dataset& ds, int k, std::uint64_t seed) {
  const auto folds = stratified_kfold(ds, k, seed);
  ASSERT_EQ(static_cast<int>(folds.size()), k);
  std::multiset<int> seen;
  const auto counts = ds.class_counts();
  for (const Fold& f : folds) {
    seen.insert(f.test.begin(), f.test.end());
    std::set<int> test(f.test.begin(), f.test.end());
    std::set<int> train(f.train.begin(), f.train.end());
    EXPECT_EQ(test.size() + train.size(), ds.size());
    for (int i : test) EXPECT_EQ(train.count(i), 0u);
    std::map<int, int> per_class;
    for (int i : f.test) per_class[ds.graphs[static_cast<std::size_t>(i)].label]++;
    for (int c = 0; c < ds.num_classes; ++c) {
      const double share = static_cast<double>(counts[static_cast<std::size_t>(c)]) / k;
      EXPECT_LE(std::abs(per_class[c] - share), 1.0) << "class " << c << " k " << k << " seed " << seed;
    }
  }
  EXPECT_EQ(seen.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(seen.count(static_cast<int>(i)), 1u);
}

TEST(Kfold, PartitionAndStratificationBound) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const int classes = 2 + static_cast<int>(rng.below(3));
    std::vector<int> labels;
    const int count = 20 + static_cast<int>(rng.below(60));
    for (int i = 0; i < count; ++i) labels.push_back(i < classes * 2 ? i % classes : static_cast<int>(rng.below(classes)));
    const Dataset ds = labelled(labels);
    const auto counts = ds.class_counts();
    const int kmax = *std::min_element(counts.begin(), counts.end());
    for (int k = 2; k <= std::min(kmax, 10); ++k) expect_partition_and_bound(ds, k, rng.next_u64());
  }
}

TEST(Kfold, DeterministicAndValidated) {
  const Dataset ds = labelled({0, 0, 0, 1, 1, 1, 1});
  const auto a = stratified_kfold(ds, 3, 1);
  const auto b = stratified_kfold(ds, 3, 1);
  for (std::size_t f = 0; f < a.size(); ++f) EXPECT_EQ(a[f].test, b[f].test);
  EXPECT_THROW(stratified_kfold(ds, 4, 1), ContractError);
  EXPECT_THROW(stratified_kfold(ds, 1, 1), ContractError);
}

TEST(Split, FractionsPerClass) {
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) labels.push_back(i < 60 ? 0 : 1);
  const Dataset ds = labelled(labels);
  const Split s = stratified_split(ds, {}, {0.8, 0.1, 0.1}, 3);
  EXPECT_EQ(s.train.size(), 80u);
  EXPECT_EQ(s.val.size(), 10u);
  EXPECT_EQ(s.test.size(), 10u);
  std::set<int> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 100u);
  int val0 = 0;
  for (int i : s.val) val0 += ds.graphs[static_cast<std::size_t>(i)].label == 0;
  EXPECT_EQ(val0, 6);
  EXPECT_THROW(stratified_split(ds, {}, {0.5, 0.1, 0.1}, 3), ContractError);
}

TEST(Split, RestrictedToSubset) {
  const Dataset ds = labelled({0, 1, 0, 1, 0, 1, 0, 1, 0, 1});
  const std::vector<int> subset{0, 1, 2, 3, 4, 5};
  const Split s = stratified_split(ds, subset, {2.0 / 3.0, 1.0 / 3.0, 0.0}, 4);
  for (const auto* part : {&s.train, &s.val, &s.test}) {
    for (int i : *part) EXPECT_LT(i, 6);
  }
  EXPECT_EQ(s.train.size() + s.val.size() + s.test.size(), 6u);
  EXPECT_EQ(s.val.size(), 2u);
}

TEST(Synthetic, FeatureSumBalancedAndShaped) {
  const Dataset ds = gen_synthetic(SyntheticKind::kFeatureSum, {200}, 1);
  ASSERT_EQ(ds.size(), 200u);
  EXPECT_EQ(ds.class_counts(), (std::vector<int>{100, 100}));
  EXPECT_EQ(ds.feature_dim, 4);
  double max0 = -1e9, min1 = 1e9;
  for (const Graph& g : ds.graphs) {
    EXPECT_GE(g.num_nodes(), 15);
    EXPECT_LE(g.num_nodes(), 25);
    EXPECT_GE(g.feat.minCoeff(), 0.0);
    EXPECT_LT(g.feat.maxCoeff(), 1.0);
    const double s = g.feat.col(0).sum();
    if (g.label == 0) max0 = std::max(max0, s);
    else min1 = std::min(min1, s);
  }
  EXPECT_LT(max0, min1);
}

TEST(Synthetic, PlantedClustersShape) {
  const Dataset ds = gen_synthetic(SyntheticKind::kPlantedClusters, {50}, 2);
  EXPECT_EQ(ds.class_counts(), (std::vector<int>{25, 25}));
  for (const Graph& g : ds.graphs) {
    EXPECT_EQ(g.num_nodes(), 24);
    EXPECT_EQ(g.feat, Matrix::Ones(24, 1));
    EXPECT_EQ(g.adj, g.adj.transpose());
  }
}

TEST(Synthetic, SeedDeterminesDataset) {
  for (auto kind : {SyntheticKind::kFeatureSum, SyntheticKind::kPlantedClusters}) {
    const Dataset a = gen_synthetic(kind, {30}, 11);
    const Dataset b = gen_synthetic(kind, {30}, 11);
    const Dataset c = gen_synthetic(kind, {30}, 12);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_TRUE(a.graphs[i] == b.graphs[i]);
      differs = differs || !(a.graphs[i] == c.graphs[i]);
    }
    EXPECT_TRUE(differs);
  }
}

TEST(Synthetic, ParsesKindsAndRejectsBadParams) {
  EXPECT_EQ(parse_synthetic_kind("feature-sum"), SyntheticKind::kFeatureSum);
  EXPECT_EQ(parse_synthetic_kind("planted-clusters"), SyntheticKind::kPlantedClusters);
  EXPECT_THROW(parse_synthetic_kind("ring"), ContractError);
  EXPECT_THROW(gen_synthetic(SyntheticKind::kFeatureSum, {1}, 0), ContractError);
}

TEST(Graph, ValidationCatchesBadInput) {
  Graph g{(Matrix(2, 2) << 0, 1, 0, 0).finished(), Matrix::Ones(2, 1), 0};
  EXPECT_THROW(validate_graph(g), DataError);
  EXPECT_NO_THROW(validate_graph(g, false));
  g.adj(0, 0) = 1.0;
  EXPECT_THROW(validate_graph(g, false), DataError);
}

}  // namespace
}  // namespace pas
