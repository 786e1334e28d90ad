#include "pas/diffcore/ops.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pas/error.hpp"

namespace pas {
namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ContractError(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()) + ")");
  }
}

void require_same_tape(const Var& a, const Var& b) {
  if (a.tape() != b.tape()) throw ContractError("operands live on different tapes");
}

Tape& tape_of(const Var& a) {
  if (!a.valid()) throw ContractError("operation on an unbound Var");
  return *a.tape();
}

}  // namespace

Var add(Var a, Var b) {
  require_same_tape(a, b);
  require_same_shape(a, b, "add");
  return tape_of(a).record(a.value() + b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  require_same_tape(a, b);
  require_same_shape(a, b, "sub");
  return tape_of(a).record(a.value() - b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate_expr(b, -g);
  });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b);
  require_same_shape(a, b, "mul");
  return tape_of(a).record(a.value().cwiseProduct(b.value()), {a, b},
                           [a, b](Tape& t, const Matrix& g) {
                             if (t.needs_grad(a)) t.accumulate_expr(a, g.cwiseProduct(t.value(b)));
                             if (t.needs_grad(b)) t.accumulate_expr(b, g.cwiseProduct(t.value(a)));
                           });
}

Var scale(Var a, double s) {
  return tape_of(a).record(a.value() * s, {a},
                           [a, s](Tape& t, const Matrix& g) { t.accumulate_expr(a, g * s); });
}

Var scale_by(Var a, Var s) {
  require_same_tape(a, s);
  if (s.value().size() != 1) throw ContractError("scale_by: scale must be 1x1");
  return tape_of(a).record(a.value() * s.scalar(), {a, s}, [a, s](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) t.accumulate_expr(a, g * t.value(s)(0, 0));
    if (t.needs_grad(s)) {
      Matrix gs(1, 1);
      gs(0, 0) = g.cwiseProduct(t.value(a)).sum();
      t.accumulate(s, gs);
    }
  });
}

Var add_const(Var a, const Matrix& c) {
  if (a.rows() != c.rows() || a.cols() != c.cols()) throw ContractError("add_const: shape mismatch");
  return tape_of(a).record(a.value() + c, {a}, [a](Tape& t, const Matrix& g) { t.accumulate(a, g); });
}

Var mul_const(Var a, const Matrix& c) {
  if (a.rows() != c.rows() || a.cols() != c.cols()) throw ContractError("mul_const: shape mismatch");
  return tape_of(a).record(a.value().cwiseProduct(c), {a},
                           [a, c](Tape& t, const Matrix& g) { t.accumulate_expr(a, g.cwiseProduct(c)); });
}

Var add_row(Var a, Var row) {
  require_same_tape(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) throw ContractError("add_row: row must be 1 x cols(a)");
  Matrix out = a.value().rowwise() + row.value().row(0);
  return tape_of(a).record(std::move(out), {a, row}, [a, row](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    if (t.needs_grad(row)) t.accumulate_expr(row, g.colwise().sum());
  });
}

Var mul_col(Var a, Var col) {
  require_same_tape(a, col);
  if (col.cols() != 1 || col.rows() != a.rows()) throw ContractError("mul_col: col must be rows(a) x 1");
  Matrix out = col.value().col(0).asDiagonal() * a.value();
  return tape_of(a).record(std::move(out), {a, col}, [a, col](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) t.accumulate_expr(a, t.value(col).col(0).asDiagonal() * g);
    if (t.needs_grad(col)) t.accumulate_expr(col, g.cwiseProduct(t.value(a)).rowwise().sum());
  });
}

Var mul_col_const(Var a, const Matrix& col) {
  if (col.cols() != 1 || col.rows() != a.rows()) throw ContractError("mul_col_const: col must be rows(a) x 1");
  Matrix out = col.col(0).asDiagonal() * a.value();
  return tape_of(a).record(std::move(out), {a}, [a, col](Tape& t, const Matrix& g) {
    t.accumulate_expr(a, col.col(0).asDiagonal() * g);
  });
}

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  if (a.cols() != b.rows()) {
    throw ContractError("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                        std::to_string(b.rows()) + ")");
  }
  Matrix out = a.value() * b.value();
  return tape_of(a).record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) t.accumulate_expr(a, g * t.value(b).transpose());
    if (t.needs_grad(b)) t.accumulate_expr(b, t.value(a).transpose() * g);
  });
}

Var transpose(Var a) {
  Matrix out = a.value().transpose();
  return tape_of(a).record(std::move(out), {a},
                           [a](Tape& t, const Matrix& g) { t.accumulate_expr(a, g.transpose()); });
}

Var tanh(Var a) {
  Matrix out = a.value().array().tanh().matrix();
  return tape_of(a).record(out, {a}, [a, out](Tape& t, const Matrix& g) {
    Matrix d = (1.0 - out.array().square()).matrix();
    if (testing::corrupt_tanh_gradient()) d *= 1.5;
    t.accumulate_expr(a, g.cwiseProduct(d));
  });
}

Var sigmoid(Var a) {
  Matrix out = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return tape_of(a).record(out, {a}, [a, out](Tape& t, const Matrix& g) {
    t.accumulate_expr(a, g.cwiseProduct((out.array() * (1.0 - out.array())).matrix()));
  });
}

Var relu(Var a) {
  Matrix out = a.value().cwiseMax(0.0);
  return tape_of(a).record(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
    t.accumulate_expr(a, (t.value(a).array() > 0.0).select(g, 0.0).matrix());
  });
}

Var elu(Var a, double alpha) {
  const Matrix& x = a.value();
  Matrix out = (x.array() > 0.0).select(x.array(), alpha * (x.array().exp() - 1.0)).matrix();
  return tape_of(a).record(std::move(out), {a}, [a, alpha](Tape& t, const Matrix& g) {
    const Matrix& xv = t.value(a);
    Matrix d = (xv.array() > 0.0).select(Matrix::Ones(xv.rows(), xv.cols()).array(), alpha * xv.array().exp()).matrix();
    t.accumulate_expr(a, g.cwiseProduct(d));
  });
}

Var leaky_relu(Var a, double slope) {
  const Matrix& x = a.value();
  Matrix out = (x.array() > 0.0).select(x.array(), slope * x.array()).matrix();
  return tape_of(a).record(std::move(out), {a}, [a, slope](Tape& t, const Matrix& g) {
    const Matrix& xv = t.value(a);
    t.accumulate_expr(a, (xv.array() > 0.0).select(g.array(), slope * g.array()).matrix());
  });
}

Var exp(Var a) {
  Matrix out = a.value().array().exp().matrix();
  return tape_of(a).record(out, {a},
                           [a, out](Tape& t, const Matrix& g) { t.accumulate_expr(a, g.cwiseProduct(out)); });
}

Var log(Var a) {
  Matrix out = a.value().array().log().matrix();
  return tape_of(a).record(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
    t.accumulate_expr(a, g.cwiseQuotient(t.value(a)));
  });
}

Var pow(Var a, double p) {
  Matrix out = a.value().array().pow(p).matrix();
  return tape_of(a).record(std::move(out), {a}, [a, p](Tape& t, const Matrix& g) {
    t.accumulate_expr(a, g.cwiseProduct((p * t.value(a).array().pow(p - 1.0)).matrix()));
  });
}

Var clamp_min(Var a, double floor) {
  Matrix out = a.value().cwiseMax(floor);
  return tape_of(a).record(std::move(out), {a}, [a, floor](Tape& t, const Matrix& g) {
    t.accumulate_expr(a, (t.value(a).array() >= floor).select(g, 0.0).matrix());
  });
}

Var sum(Var a) {
  // Plain sequential sums throughout: zero rows inserted anywhere leave the
  // result bit-identical, which masked and shrunken graphs rely on.
  Matrix out(1, 1);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.value().size(); ++i) acc += a.value().data()[i];
  out(0, 0) = acc;
  const Eigen::Index r = a.rows(), c = a.cols();
  return tape_of(a).record(std::move(out), {a}, [a, r, c](Tape& t, const Matrix& g) {
    t.accumulate_expr(a, Matrix::Constant(r, c, g(0, 0)));
  });
}

Var row_sum(Var a) {
  const Matrix& x = a.value();
  Matrix out = Matrix::Zero(x.rows(), 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) out(i, 0) += x(i, j);
  }
  const Eigen::Index c = a.cols();
  return tape_of(a).record(std::move(out), {a}, [a, c](Tape& t, const Matrix& g) {
    t.accumulate_expr(a, g.col(0).replicate(1, c));
  });
}

Var col_sum(Var a) {
  const Matrix& x = a.value();
  Matrix out = Matrix::Zero(1, x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out += x.row(i);
  const Eigen::Index r = a.rows();
  return tape_of(a).record(std::move(out), {a}, [a, r](Tape& t, const Matrix& g) {
    t.accumulate_expr(a, g.row(0).replicate(r, 1));
  });
}

Var col_max(Var a, const std::vector<bool>& candidates) {
  const Matrix& x = a.value();
  if (!candidates.empty() && static_cast<Eigen::Index>(candidates.size()) != x.rows()) {
    throw ContractError("col_max: candidate mask length differs from row count");
  }
  Matrix out = Matrix::Zero(1, x.cols());
  std::vector<int> arg(static_cast<std::size_t>(x.cols()), -1);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (!candidates.empty() && !candidates[static_cast<std::size_t>(i)]) continue;
      if (arg[j] < 0 || x(i, j) > out(0, j)) {
        out(0, j) = x(i, j);
        arg[j] = static_cast<int>(i);
      }
    }
  }
  const Eigen::Index r = x.rows(), c = x.cols();
  return tape_of(a).record(std::move(out), {a}, [a, arg, r, c](Tape& t, const Matrix& g) {
    Matrix ga = Matrix::Zero(r, c);
    for (Eigen::Index j = 0; j < c; ++j) {
      if (arg[j] >= 0) ga(arg[j], j) = g(0, j);
    }
    t.accumulate(a, ga);
  });
}

Var segment_sum(Var a, std::span<const int> segment, int count) {
  const Matrix& x = a.value();
  if (static_cast<Eigen::Index>(segment.size()) != x.rows()) throw ContractError("segment_sum: length mismatch");
  Matrix out = Matrix::Zero(count, x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int s = segment[static_cast<std::size_t>(i)];
    if (s < 0 || s >= count) throw ContractError("segment_sum: segment id out of range");
    out.row(s) += x.row(i);
  }
  std::vector<int> seg(segment.begin(), segment.end());
  return tape_of(a).record(std::move(out), {a}, [a, seg](Tape& t, const Matrix& g) {
    Matrix ga(static_cast<Eigen::Index>(seg.size()), g.cols());
    for (std::size_t i = 0; i < seg.size(); ++i) ga.row(static_cast<Eigen::Index>(i)) = g.row(seg[i]);
    t.accumulate(a, ga);
  });
}

Var segment_max(Var a, std::span<const int> segment, int count) {
  const Matrix& x = a.value();
  if (static_cast<Eigen::Index>(segment.size()) != x.rows()) throw ContractError("segment_max: length mismatch");
  Matrix out = Matrix::Zero(count, x.cols());
  std::vector<int> arg(static_cast<std::size_t>(count * x.cols()), -1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int s = segment[static_cast<std::size_t>(i)];
    if (s < 0 || s >= count) throw ContractError("segment_max: segment id out of range");
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      int& best = arg[static_cast<std::size_t>(s * x.cols() + j)];
      if (best < 0 || x(i, j) > out(s, j)) {
        out(s, j) = x(i, j);
        best = static_cast<int>(i);
      }
    }
  }
  const Eigen::Index r = x.rows(), c = x.cols();
  return tape_of(a).record(std::move(out), {a}, [a, arg, r, c, count](Tape& t, const Matrix& g) {
    Matrix ga = Matrix::Zero(r, c);
    for (int s = 0; s < count; ++s) {
      for (Eigen::Index j = 0; j < c; ++j) {
        const int i = arg[static_cast<std::size_t>(s * c + j)];
        if (i >= 0) ga(i, j) += g(s, j);
      }
    }
    t.accumulate(a, ga);
  });
}

Var softmax(Var a, const std::vector<bool>& allowed) {
  const Matrix& x = a.value();
  if (!allowed.empty() && static_cast<Eigen::Index>(allowed.size()) != x.size()) {
    throw ContractError("softmax: allowed mask length differs from element count");
  }
  auto ok = [&](Eigen::Index i) { return allowed.empty() || allowed[static_cast<std::size_t>(i)]; };
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (ok(i)) mx = std::max(mx, x.data()[i]);
  }
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  double z = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!ok(i)) continue;
    out.data()[i] = std::exp(x.data()[i] - mx);
    z += out.data()[i];
  }
  if (z > 0.0) out /= z;
  return tape_of(a).record(out, {a}, [a, out](Tape& t, const Matrix& g) {
    const double dot = g.cwiseProduct(out).sum();
    t.accumulate_expr(a, (out.array() * (g.array() - dot)).matrix());
  });
}

Var softmax_rows(Var a, const Matrix& allowed) {
  const Matrix& x = a.value();
  if (allowed.rows() != x.rows() || allowed.cols() != x.cols()) {
    throw ContractError("softmax_rows: allowed mask shape mismatch");
  }
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (allowed(i, j) != 0.0) mx = std::max(mx, x(i, j));
    }
    double z = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (allowed(i, j) == 0.0) continue;
      out(i, j) = std::exp(x(i, j) - mx);
      z += out(i, j);
    }
    if (z > 0.0) out.row(i) /= z;
  }
  return tape_of(a).record(out, {a}, [a, out](Tape& t, const Matrix& g) {
    Eigen::VectorXd dots = g.cwiseProduct(out).rowwise().sum();
    Matrix ga = out.array() * (g.colwise() - dots).array();
    t.accumulate(a, ga);
  });
}

Var outer_add(Var col, Var row) {
  require_same_tape(col, row);
  if (col.cols() != 1 || row.rows() != 1) throw ContractError("outer_add: expects N x 1 and 1 x M");
  Matrix out = col.value().col(0).replicate(1, row.cols()).rowwise() + row.value().row(0);
  return tape_of(col).record(std::move(out), {col, row}, [col, row](Tape& t, const Matrix& g) {
    if (t.needs_grad(col)) t.accumulate_expr(col, g.rowwise().sum());
    if (t.needs_grad(row)) t.accumulate_expr(row, g.colwise().sum());
  });
}

Var gather_rows(Var a, std::span<const int> idx) {
  const Matrix& x = a.value();
  Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= x.rows()) throw ContractError("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(k)) = x.row(idx[k]);
  }
  std::vector<int> ix(idx.begin(), idx.end());
  const Eigen::Index r = x.rows();
  return tape_of(a).record(std::move(out), {a}, [a, ix, r](Tape& t, const Matrix& g) {
    Matrix ga = Matrix::Zero(r, g.cols());
    for (std::size_t k = 0; k < ix.size(); ++k) ga.row(ix[k]) += g.row(static_cast<Eigen::Index>(k));
    t.accumulate(a, ga);
  });
}

Var scatter_rows(Var a, std::span<const int> idx, Eigen::Index rows) {
  const Matrix& x = a.value();
  if (static_cast<Eigen::Index>(idx.size()) != x.rows()) throw ContractError("scatter_rows: index count mismatch");
  Matrix out = Matrix::Zero(rows, x.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= rows) throw ContractError("scatter_rows: index out of range");
    out.row(idx[k]) += x.row(static_cast<Eigen::Index>(k));
  }
  std::vector<int> ix(idx.begin(), idx.end());
  return tape_of(a).record(std::move(out), {a}, [a, ix](Tape& t, const Matrix& g) {
    Matrix ga(static_cast<Eigen::Index>(ix.size()), g.cols());
    for (std::size_t k = 0; k < ix.size(); ++k) ga.row(static_cast<Eigen::Index>(k)) = g.row(ix[k]);
    t.accumulate(a, ga);
  });
}

Var gather_block(Var a, std::span<const int> idx) {
  const Matrix& x = a.value();
  const auto k = static_cast<Eigen::Index>(idx.size());
  Matrix out(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) out(i, j) = x(idx[i], idx[j]);
  }
  std::vector<int> ix(idx.begin(), idx.end());
  const Eigen::Index r = x.rows(), c = x.cols();
  return tape_of(a).record(std::move(out), {a}, [a, ix, r, c](Tape& t, const Matrix& g) {
    Matrix ga = Matrix::Zero(r, c);
    for (std::size_t i = 0; i < ix.size(); ++i) {
      for (std::size_t j = 0; j < ix.size(); ++j) {
        ga(ix[i], ix[j]) += g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
    t.accumulate(a, ga);
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  const Eigen::Index r = parts[0].rows();
  Eigen::Index total = 0;
  for (const Var& p : parts) {
    require_same_tape(parts[0], p);
    if (p.rows() != r) throw ContractError("concat_cols: row counts differ");
    total += p.cols();
  }
  Matrix out(r, total);
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    out.middleCols(off, p.cols()) = p.value();
    off += p.cols();
  }
  return tape_of(parts[0]).record(std::move(out), parts, [parts](Tape& t, const Matrix& g) {
    Eigen::Index o = 0;
    for (const Var& p : parts) {
      const Eigen::Index w = t.value(p).cols();
      if (t.needs_grad(p)) t.accumulate_expr(p, g.middleCols(o, w));
      o += w;
    }
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractError("concat_rows: no inputs");
  const Eigen::Index c = parts[0].cols();
  Eigen::Index total = 0;
  for (const Var& p : parts) {
    require_same_tape(parts[0], p);
    if (p.cols() != c) throw ContractError("concat_rows: column counts differ");
    total += p.rows();
  }
  Matrix out(total, c);
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    out.middleRows(off, p.rows()) = p.value();
    off += p.rows();
  }
  return tape_of(parts[0]).record(std::move(out), parts, [parts](Tape& t, const Matrix& g) {
    Eigen::Index o = 0;
    for (const Var& p : parts) {
      const Eigen::Index h = t.value(p).rows();
      if (t.needs_grad(p)) t.accumulate_expr(p, g.middleRows(o, h));
      o += h;
    }
  });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index len) {
  if (start < 0 || len < 0 || start + len > a.cols()) throw ContractError("slice_cols: range out of bounds");
  Matrix out = a.value().middleCols(start, len);
  const Eigen::Index r = a.rows(), c = a.cols();
  return tape_of(a).record(std::move(out), {a}, [a, start, len, r, c](Tape& t, const Matrix& g) {
    Matrix ga = Matrix::Zero(r, c);
    ga.middleCols(start, len) = g;
    t.accumulate(a, ga);
  });
}

Var reshape(Var a, Eigen::Index rows, Eigen::Index cols) {
  if (rows * cols != a.value().size()) throw ContractError("reshape: element count mismatch");
  Matrix out = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
  const Eigen::Index r = a.rows(), c = a.cols();
  return tape_of(a).record(std::move(out), {a}, [a, r, c](Tape& t, const Matrix& g) {
    t.accumulate_expr(a, Eigen::Map<const Matrix>(g.data(), r, c));
  });
}

Var cross_entropy(Var logits, int label) {
  const Matrix& x = logits.value();
  if (x.rows() != 1) throw ContractError("cross_entropy: logits must be a single row");
  if (label < 0 || label >= x.cols()) {
    throw ContractError("cross_entropy: label " + std::to_string(label) + " outside [0, " +
                        std::to_string(x.cols()) + ")");
  }
  Eigen::Index top = 0;
  const double mx = x.row(0).maxCoeff(&top);
  // log-sum-exp as mx + log1p(sum over the non-max entries) keeps precision
  // when one logit dominates.
  double rest = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (j != top) rest += std::exp(x(0, j) - mx);
  }
  const double lse = mx + std::log1p(rest);
  Matrix out(1, 1);
  out(0, 0) = (mx - x(0, label)) + std::log1p(rest);
  Matrix probs = (x.array() - lse).exp().matrix();
  return tape_of(logits).record(std::move(out), {logits}, [logits, probs, label](Tape& t, const Matrix& g) {
    Matrix d = probs;
    d(0, label) -= 1.0;
    t.accumulate_expr(logits, d * g(0, 0));
  });
}

LstmState lstm_cell(Var x, const LstmState& state, Var w_x, Var w_h, Var b) {
  const Eigen::Index hid = state.h.cols();
  if (w_x.cols() != 4 * hid || w_h.cols() != 4 * hid || b.cols() != 4 * hid) {
    throw ContractError("lstm_cell: weight widths must be 4 x hidden");
  }
  Var gates = add(add(matmul(x, w_x), matmul(state.h, w_h)), b);
  Var i = sigmoid(slice_cols(gates, 0, hid));
  Var f = sigmoid(slice_cols(gates, hid, hid));
  Var g = tanh(slice_cols(gates, 2 * hid, hid));
  Var o = sigmoid(slice_cols(gates, 3 * hid, hid));
  Var c = add(mul(f, state.c), mul(i, g));
  Var h = mul(o, tanh(c));
  return {h, c};
}

}  // namespace pas
