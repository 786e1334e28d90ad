#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pas {

struct GradSuiteOptions {
  int graphs = 20;
  Eigen::Index min_nodes = 3;
  Eigen::Index max_nodes = 30;
  Eigen::Index hidden = 4;
  double tolerance = 1e-4;
  double step = 1e-5;
  // See GradCheckOptions. A case fails outright when more than
  // max_skipped_fraction of its entries sit at non-differentiable points.
  double relative_floor = 1e-3;
  double kink_tolerance = 1e-4;
  double max_skipped_fraction = 0.25;
  std::uint64_t seed = 0;
};

struct GradSuiteCase {
  // Component under test, e.g. "agg/GAT", "pool/SAGPOOL", "relax/merge".
  std::string name;
  int graph = 0;
  Eigen::Index nodes = 0;
  double max_rel_error = 0.0;
  // Parameter holding the worst entry.
  std::string worst_key;
  Eigen::Index checked = 0;
  Eigen::Index skipped = 0;
  bool passed = false;
};

struct GradSuiteResult {
  std::vector<GradSuiteCase> cases;
  double tolerance = 0.0;

  double max_rel_error() const;
  Eigen::Index skipped() const;
  bool passed() const;
  std::vector<GradSuiteCase> failures() const;
};

// Gradient checks of every aggregation kind, every parameterised pooling kind
// (through the masked coarsening), every readout, every merge, the
// classifier loss and relax_weights for each site width, on random graphs
// with weighted edges and soft masks. Inputs and parameters are checked
// together. `progress` is called after each case.
GradSuiteResult run_gradient_suite(const GradSuiteOptions& opts,
                                   const std::function<void(const GradSuiteCase&)>& progress = {});

}  // namespace pas
