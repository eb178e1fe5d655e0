#pragma once

#include <Eigen/Dense>

namespace opeps {

struct NnlsResult {
    Eigen::VectorXd x;
    int iterations = 0;
    bool converged = false;
};

// Lawson-Hanson active-set solver for min ||A x - y||_2 subject to x >= 0.
// Terminates when every zero-constrained coordinate has dual value
// w_i = (A^T (y - A x))_i below dual_tolerance; a negative tolerance selects
// the default 1e-10 * ||y||_2.
NnlsResult nnls(const Eigen::MatrixXd &A, const Eigen::VectorXd &y,
                double dual_tolerance = -1.0);

} // namespace opeps
