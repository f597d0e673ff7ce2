#pragma once

#define EIGEN_DONT_PARALLELIZE
#include <Eigen/Dense>

namespace basedlab {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace basedlab
