#pragma once

#include <Eigen/Dense>

namespace aircomp {

/// min ‖Ax - b‖₂ subject to x >= 0 (Lawson-Hanson active set).
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter = 0);

}  // namespace aircomp
