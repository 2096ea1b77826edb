#pragma once

#include <Eigen/Dense>

namespace lidlab {

// Rows are samples, columns are ambient coordinates.
using Batch = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

} // namespace lidlab
