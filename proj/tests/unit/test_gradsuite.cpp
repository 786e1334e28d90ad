#include <gtest/gtest.h>

#include <set>

#include "pas/diffcore/tape.hpp"
#include "pas/error.hpp"
#include "pas/gradsuite.hpp"

namespace pas {
namespace {

GradSuiteOptions small_suite() {
  GradSuiteOptions o;
  o.graphs = 3;
  o.seed = 4;
  return o;
}

TEST(GradSuite, CoversEveryComponentAndPasses) {
  int calls = 0;
  const GradSuiteResult r = run_gradient_suite(small_suite(), [&](const GradSuiteCase&) { ++calls; });
  std::set<std::string> names;
  for (const auto& c : r.cases) {
    names.insert(c.name);
    EXPECT_TRUE(c.passed) << c.name << " " << c.max_rel_error << " " << c.worst_key;
    EXPECT_GE(c.nodes, 3);
    EXPECT_LE(c.nodes, 30);
  }
  // 6 aggregations, 6 parameterised poolings, 7 readouts, 5 merges, classifier,
  // 4 relaxations.
  EXPECT_EQ(names.size(), 29u);
  EXPECT_TRUE(names.count("pool/GAPPOOL"));
  EXPECT_FALSE(names.count("pool/NONE"));
  EXPECT_FALSE(names.count("pool/HOPPOOL_1"));
  EXPECT_EQ(calls, static_cast<int>(r.cases.size()));
  EXPECT_TRUE(r.passed());
  EXPECT_LE(r.max_rel_error(), 1e-4);
}

TEST(GradSuite, CorruptedGradientFails) {
  testing::set_corrupt_tanh_gradient(true);
  const GradSuiteResult r = run_gradient_suite(small_suite());
  testing::set_corrupt_tanh_gradient(false);
  EXPECT_FALSE(r.passed());
  std::set<std::string> failing;
  for (const auto& c : r.failures()) failing.insert(c.name);
  EXPECT_TRUE(failing.count("pool/SAGPOOL"));
  EXPECT_TRUE(failing.count("merge/M_LSTM"));
  EXPECT_FALSE(failing.count("agg/GCN"));
}

TEST(GradSuite, RejectsBadOptions) {
  GradSuiteOptions o;
  o.min_nodes = 10;
  o.max_nodes = 5;
  EXPECT_THROW(run_gradient_suite(o), ContractError);
  o = {};
  o.graphs = 0;
  EXPECT_THROW(run_gradient_suite(o), ContractError);
}

}  // namespace
}  // namespace pas
