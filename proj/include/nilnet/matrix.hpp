#pragma once

#include <Eigen/Core>

namespace nilnet {

// Row-major so that one row is one sample.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace nilnet
