#include <gtest/gtest.h>

#include "pas/aggops.hpp"
#include "pas/diffcore/gradcheck.hpp"
#include "pas/error.hpp"
#include "test_support.hpp"

namespace pas {
namespace {

using test::constant_graph;
using test::random_matrix;

const std::vector<AggKind> kAllAgg{AggKind::kGcn, AggKind::kGat, AggKind::kSage,
                                   AggKind::kGin, AggKind::kGraphConv, AggKind::kMlp};

ModelConfig scalar_config() {
  ModelConfig cfg = test::small_config(1, 1);
  cfg.activation = Activation::kIdentity;
  return cfg;
}

TEST(Aggregate, GcnSingleEdge) {
  ParamStore p;
  p.get_or_create("gcn/W", 1, 1).value = Matrix::Ones(1, 1);
  Tape t;
  const MixedGraph g = constant_graph(t, test::path_graph(2), (Matrix(2, 1) << 1, 0).finished());
  const Matrix out = aggregate(AggKind::kGcn, g, p, "gcn", scalar_config()).value();
  EXPECT_NEAR(out(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(out(1, 0), 0.5, 1e-15);
}

TEST(Aggregate, GinPathWithIdentityMlp) {
  ParamStore p;
  p.get_or_create("gin/W0", 1, 1).value = Matrix::Ones(1, 1);
  p.get_or_create("gin/W1", 1, 1).value = Matrix::Ones(1, 1);
  Tape t;
  const MixedGraph g = constant_graph(t, test::path_graph(3), Matrix::Ones(3, 1));
  EXPECT_EQ(aggregate(AggKind::kGin, g, p, "gin", scalar_config()).value(), (Matrix(3, 1) << 2, 3, 2).finished());
}

TEST(Aggregate, SageAveragesWeightedNeighbours) {
  ParamStore p;
  p.get_or_create("s/W_self", 1, 1).value = Matrix::Zero(1, 1);
  p.get_or_create("s/W_nb", 1, 1).value = Matrix::Ones(1, 1);
  Tape t;
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = a(1, 0) = 1.0;
  a(0, 2) = a(2, 0) = 3.0;
  const MixedGraph g = constant_graph(t, a, (Matrix(3, 1) << 0, 4, 8).finished());
  const Matrix out = aggregate(AggKind::kSage, g, p, "s", scalar_config()).value();
  EXPECT_NEAR(out(0, 0), (4.0 + 24.0) / 4.0, 1e-14);
  EXPECT_NEAR(out(1, 0), 0.0, 1e-14);
}

TEST(Aggregate, GatAttendsOnlyToNeighbourhood) {
  Rng rng(3);
  ParamStore p;
  Tape t;
  const ModelConfig cfg = test::small_config(2, 3);
  // Node 2 is isolated: with a self-only neighbourhood its output is W h_2.
  Matrix a = test::path_graph(2);
  a.conservativeResize(3, 3);
  a.row(2).setZero();
  a.col(2).setZero();
  const Matrix h = random_matrix(rng, 3, 2);
  ModelConfig lin = cfg;
  lin.activation = Activation::kIdentity;
  const Matrix out = aggregate(AggKind::kGat, constant_graph(t, a, h), p, "gat", lin).value();
  const Matrix expect = h.row(2) * p.at("gat/W").value;
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(out(2, j), expect(0, j), 1e-14);
}

TEST(Aggregate, MlpIgnoresAdjacency) {
  Rng rng(4);
  ParamStore p;
  const Matrix h = random_matrix(rng, 5, 3);
  Tape t;
  const ModelConfig cfg = test::small_config(3);
  const Matrix a = aggregate(AggKind::kMlp, constant_graph(t, test::path_graph(5), h), p, "mlp", cfg).value();
  const Matrix b = aggregate(AggKind::kMlp, constant_graph(t, test::random_adjacency(rng, 5, 0.8), h), p, "mlp", cfg).value();
  EXPECT_EQ(a, b);
}

TEST(Aggregate, ZeroMaskRowsAreExactlyZeroEvenWithBiases) {
  Rng rng(5);
  const ModelConfig cfg = test::small_config(3);
  for (AggKind k : kAllAgg) {
    ParamStore p(1);
    Tape t;
    Matrix mask = (Matrix(6, 1) << 1, 0, 0.5, 1, 0, 1).finished();
    Matrix h = random_matrix(rng, 6, 3);
    Matrix a = test::random_adjacency(rng, 6, 0.6);
    const Var out0 = aggregate(k, constant_graph(t, a, h, mask), p, "k", cfg);
    // Push every bias away from zero so unmasked biases would show up.
    for (auto& [key, param] : p) param.value.array() += 0.7;
    const Matrix out = aggregate(k, constant_graph(t, a, h, mask), p, "k", cfg).value();
    for (int v : {1, 4}) {
      for (Eigen::Index j = 0; j < out.cols(); ++j) EXPECT_EQ(out(v, j), 0.0) << to_string(k);
    }
    EXPECT_GT(out.row(0).cwiseAbs().sum() + out0.value().row(0).cwiseAbs().sum(), 0.0);
  }
}

TEST(Aggregate, PermutationEquivariance) {
  Rng rng(6);
  const ModelConfig cfg = test::small_config(3);
  for (AggKind k : kAllAgg) {
    for (int trial = 0; trial < 5; ++trial) {
      const int n = 3 + static_cast<int>(rng.below(10));
      Matrix a = test::random_adjacency(rng, n, 0.4);
      // Weighted, as produced by soft pooling mixtures.
      a = a.cwiseProduct(random_matrix(rng, n, n, 0.2, 1.0));
      a = (a + a.transpose()).eval() * 0.5;
      const Matrix h = random_matrix(rng, n, 3);
      const Matrix m = random_matrix(rng, n, 1, 0.0, 1.0);
      const Matrix perm = test::permutation(test::random_permutation(rng, n));
      ParamStore p(trial);
      Tape t;
      const Matrix out = aggregate(k, constant_graph(t, a, h, m), p, "k", cfg).value();
      const Matrix out_p =
          aggregate(k, constant_graph(t, perm * a * perm.transpose(), perm * h, perm * m), p, "k", cfg).value();
      EXPECT_LE((out_p - perm * out).cwiseAbs().maxCoeff(), 1e-12) << to_string(k);
    }
  }
}

class AggGradient : public ::testing::TestWithParam<std::tuple<AggKind, Activation>> {};

TEST_P(AggGradient, MatchesFiniteDifferences) {
  const auto [kind, act] = GetParam();
  Rng rng(7);
  ModelConfig cfg = test::small_config(3);
  cfg.activation = act;
  for (int trial = 0; trial < 3; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(8));
    Matrix a = test::random_adjacency(rng, n, 0.5).cwiseProduct(random_matrix(rng, n, n, 0.3, 1.0));
    const Matrix mask = random_matrix(rng, n, 1, 0.0, 1.0);
    ParamStore p(static_cast<std::uint64_t>(trial));
    test::add_input(p, random_matrix(rng, n, 3));
    {
      Tape t;  // materialise parameters
      aggregate(kind, test::trainable_graph(t, p, a, mask), p, "k", cfg);
    }
    for (auto& [key, param] : p) param.value = random_matrix(rng, param.value.rows(), param.value.cols());
    const auto report = grad_check(
        [&](Tape& t) { return test::probe(aggregate(kind, test::trainable_graph(t, p, a, mask), p, "k", cfg)); }, p);
    EXPECT_LE(report.max_rel_error(), 1e-4) << to_string(kind);
  }
}

INSTANTIATE_TEST_SUITE_P(AllKinds, AggGradient,
                         ::testing::Combine(::testing::ValuesIn(kAllAgg),
                                            ::testing::Values(Activation::kRelu, Activation::kElu)),
                         [](const auto& info) {
                           return to_string(std::get<0>(info.param)) + "_" + to_string(std::get<1>(info.param));
                         });

TEST(Aggregate, NonFiniteOutputNamesKind) {
  ParamStore p;
  Tape t;
  Matrix h = Matrix::Ones(2, 1);
  h(0, 0) = std::numeric_limits<double>::infinity();
  try {
    aggregate(AggKind::kSage, constant_graph(t, test::path_graph(2), h), p, "s", test::small_config(1));
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("SAGE"), std::string::npos);
  }
}

TEST(Aggregate, OutputWidthIsHidden) {
  Rng rng(8);
  const ModelConfig cfg = test::small_config(5, 7);
  for (AggKind k : kAllAgg) {
    ParamStore p;
    Tape t;
    const Var out = aggregate(k, constant_graph(t, test::path_graph(4), random_matrix(rng, 4, 5)), p, "k", cfg);
    EXPECT_EQ(out.rows(), 4);
    EXPECT_EQ(out.cols(), 7);
  }
}

}  // namespace
}  // namespace pas
