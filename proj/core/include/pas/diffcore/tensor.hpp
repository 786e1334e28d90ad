#pragma once

#include <Eigen/Dense>

namespace pas {

// All numerics are float64. Row-major so row gathers/scatters are contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace pas
