#include "pas/diffcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pas/error.hpp"

namespace pas {

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.max_rel_error);
  return m;
}

Eigen::Index GradCheckReport::checked() const {
  Eigen::Index n = 0;
  for (const auto& e : entries) n += e.checked;
  return n;
}

Eigen::Index GradCheckReport::skipped() const {
  Eigen::Index n = 0;
  for (const auto& e : entries) n += e.skipped;
  return n;
}

namespace {

double evaluate(const ScalarFunction& f, const std::string& key, Eigen::Index index) {
  Tape tape;
  Var out = f(tape);
  const double v = out.scalar();
  if (!std::isfinite(v)) {
    throw NumericError("grad_check: non-finite function value while perturbing '" + key + "'[" +
                       std::to_string(index) + "]");
  }
  return v;
}

}  // namespace

GradCheckReport grad_check(const ScalarFunction& f, ParamStore& params, double step) {
  GradCheckOptions opts;
  opts.step = step;
  return grad_check(f, params, opts);
}

GradCheckReport grad_check(const ScalarFunction& f, ParamStore& params, const GradCheckOptions& opts) {
  const double step = opts.step;
  if (!(step >= 1e-7 && step <= 1e-3)) throw ContractError("grad_check: step must lie in [1e-7, 1e-3]");
  if (!(opts.relative_floor >= 0.0 && opts.relative_floor < 1.0)) {
    throw ContractError("grad_check: relative_floor must lie in [0, 1)");
  }

  params.zero_grad();
  double f0 = 0.0;
  {
    Tape tape;
    Var out = f(tape);
    f0 = out.scalar();
    if (!std::isfinite(f0)) throw NumericError("grad_check: non-finite function value at the base point");
    tape.backward(out);
  }

  struct Pending {
    std::string key;
    Matrix analytic;
    Matrix numeric;
    std::vector<bool> kink;
  };
  std::vector<Pending> pending;
  double scale = 0.0;
  for (auto& [key, p] : params) {
    Pending pe{key, p.grad.size() == 0 ? Matrix::Zero(p.value.rows(), p.value.cols()) : p.grad,
               Matrix(p.value.rows(), p.value.cols()), std::vector<bool>(static_cast<std::size_t>(p.value.size()))};
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      double& x = p.value.data()[i];
      const double saved = x;
      x = saved + step;
      const double fp = evaluate(f, key, i);
      x = saved - step;
      const double fm = evaluate(f, key, i);
      x = saved;
      const double n = (fp - fm) / (2.0 * step);
      pe.numeric.data()[i] = n;
      if (opts.skip_kinks) {
        const double up = (fp - f0) / step;
        const double down = (f0 - fm) / step;
        pe.kink[static_cast<std::size_t>(i)] =
            std::abs(up - down) > opts.kink_tolerance * (1.0 + std::max(std::abs(up), std::abs(down)));
      }
      if (!pe.kink[static_cast<std::size_t>(i)]) scale = std::max(scale, std::abs(n));
    }
    pending.push_back(std::move(pe));
  }

  const double floor = std::max(1e-8, opts.relative_floor * scale);
  GradCheckReport report;
  for (const Pending& pe : pending) {
    GradCheckEntry entry;
    entry.key = pe.key;
    for (Eigen::Index i = 0; i < pe.numeric.size(); ++i) {
      if (pe.kink[static_cast<std::size_t>(i)]) {
        ++entry.skipped;
        continue;
      }
      ++entry.checked;
      const double a = pe.analytic.data()[i];
      const double n = pe.numeric.data()[i];
      const double rel = std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
      if (entry.checked == 1 || rel > entry.max_rel_error) {
        entry.max_rel_error = rel;
        entry.worst_index = i;
        entry.analytic = a;
        entry.numeric = n;
      }
    }
    report.entries.push_back(entry);
  }
  params.zero_grad();
  return report;
}

}  // namespace pas
