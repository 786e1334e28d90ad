#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pas/diffcore/param_store.hpp"
#include "pas/diffcore/tape.hpp"

namespace pas {

struct GradCheckEntry {
  std::string key;
  double max_rel_error = 0.0;
  // Scalar index (row-major) where the worst error occurred.
  Eigen::Index worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  Eigen::Index checked = 0;
  // Entries left out because f is not differentiable within +-step.
  Eigen::Index skipped = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;

  double max_rel_error() const;
  Eigen::Index checked() const;
  Eigen::Index skipped() const;
  bool passed(double tolerance) const { return max_rel_error() <= tolerance; }
};

// Builds the scalar to differentiate on the supplied tape. Must be
// deterministic in the parameter values.
using ScalarFunction = std::function<Var(Tape&)>;

struct GradCheckOptions {
  double step = 1e-5;
  // Denominator floor as a fraction of the largest |numeric| entry over all
  // parameters. Central differences carry ~eps |f| / step of rounding noise,
  // so entries far below the gradient's scale cannot be resolved on their own.
  double relative_floor = 0.0;
  // Skip entries where the one-sided slopes (f(p+h) - f(p)) / h and
  // (f(p) - f(p-h)) / h differ by more than kink_tolerance * (1 + |slope|):
  // a ReLU kink, max switch or top-k reselection inside the window. The test
  // depends only on f, never on the analytic gradient.
  bool skip_kinks = false;
  double kink_tolerance = 1e-3;
};

// Compares reverse-mode gradients against central differences
// (f(p+h) - f(p-h)) / 2h for every scalar in `params`. Relative error uses
// the denominator max(|analytic|, |numeric|, 1e-8, floor). Parameter values
// are restored before returning; gradients are left zeroed.
GradCheckReport grad_check(const ScalarFunction& f, ParamStore& params, const GradCheckOptions& opts);
GradCheckReport grad_check(const ScalarFunction& f, ParamStore& params, double step = 1e-5);

}  // namespace pas
