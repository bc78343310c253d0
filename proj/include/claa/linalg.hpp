#pragma once

#include <Eigen/Dense>

namespace claa {

// Row-major so one sentence embedding is one contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace claa
