#pragma once

#include <span>
#include <vector>

#include "pas/diffcore/tape.hpp"

namespace pas {

// Differentiable operations on Var. Every op records its own backward pass
// on the tape of its first operand. Index arguments are 0-based row indices.

// Elementwise arithmetic on equal shapes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }

Var scale(Var a, double s);
// a * s where s is a 1x1 node.
Var scale_by(Var a, Var s);
Var add_const(Var a, const Matrix& c);
Var mul_const(Var a, const Matrix& c);

// Broadcast a 1 x d row over the rows of an N x d matrix.
Var add_row(Var a, Var row);
// Scale row i of a (N x d) by col(i) (N x 1).
Var mul_col(Var a, Var col);
Var mul_col_const(Var a, const Matrix& col);

Var matmul(Var a, Var b);
Var transpose(Var a);

Var tanh(Var a);
Var sigmoid(Var a);
Var relu(Var a);
Var elu(Var a, double alpha = 1.0);
Var leaky_relu(Var a, double slope = 0.2);
Var exp(Var a);
Var log(Var a);
Var pow(Var a, double p);
// max(a, floor) elementwise; zero gradient where clamped.
Var clamp_min(Var a, double floor);

// Reductions.
Var sum(Var a);       // -> 1x1
Var row_sum(Var a);   // N x d -> N x 1
Var col_sum(Var a);   // N x d -> 1 x d
// Per-column max over the candidate rows (all rows when candidates is
// empty). Gradient goes to the single argmax row; ties pick the lowest
// index. With no candidate rows the result is the zero row.
Var col_max(Var a, const std::vector<bool>& candidates = {});
// Rows grouped by segment id in [0, count); result is count x d.
Var segment_sum(Var a, std::span<const int> segment, int count);
Var segment_max(Var a, std::span<const int> segment, int count);

// Softmax over every entry of a (one distribution). Entries where allowed
// is false get probability exactly 0; allowed empty means all entries.
Var softmax(Var a, const std::vector<bool>& allowed = {});
// Independent softmax per row over entries where allowed(i, j) != 0. A row
// with no allowed entries yields zeros.
Var softmax_rows(Var a, const Matrix& allowed);
// col (N x 1) + row (1 x M) -> N x M.
Var outer_add(Var col, Var row);

Var gather_rows(Var a, std::span<const int> idx);
// Inverse of gather_rows: places the rows of a at idx of a rows x d zero matrix.
Var scatter_rows(Var a, std::span<const int> idx, Eigen::Index rows);
// a(idx, idx).
Var gather_block(Var a, std::span<const int> idx);

Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index len);
// Row-major reshape.
Var reshape(Var a, Eigen::Index rows, Eigen::Index cols);

// -log softmax(logits)[label] for a 1 x C row.
Var cross_entropy(Var logits, int label);

struct LstmState {
  Var h;
  Var c;
};

// Standard LSTM cell. x: 1 x in, h/c: 1 x hid, w_x: in x 4hid,
// w_h: hid x 4hid, b: 1 x 4hid. Gate order i, f, g, o.
LstmState lstm_cell(Var x, const LstmState& state, Var w_x, Var w_h, Var b);

}  // namespace pas
