#include "opeps/nnls.hpp"

#include <limits>
#include <vector>

namespace opeps {

NnlsResult nnls(const Eigen::MatrixXd &A, const Eigen::VectorXd &y,
                double dual_tolerance) {
    const Eigen::Index n = A.cols();
    if (dual_tolerance < 0)
        dual_tolerance = 1e-10 * y.norm();

    NnlsResult result;
    result.x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<size_t>(n), false);

    auto solve_passive = [&](std::vector<Eigen::Index> &cols,
                             Eigen::VectorXd &z) {
        cols.clear();
        for (Eigen::Index i = 0; i < n; ++i)
            if (passive[static_cast<size_t>(i)])
                cols.push_back(i);
        Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(cols.size()));
        for (size_t c = 0; c < cols.size(); ++c)
            Ap.col(static_cast<Eigen::Index>(c)) = A.col(cols[c]);
        z = Ap.colPivHouseholderQr().solve(y);
    };

    const int max_outer = std::max<int>(3 * static_cast<int>(n), 30);
    std::vector<Eigen::Index> cols;
    Eigen::VectorXd z;
    for (int outer = 0; outer < max_outer; ++outer) {
        ++result.iterations;
        const Eigen::VectorXd w = A.transpose() * (y - A * result.x);
        Eigen::Index candidate = -1;
        double best = dual_tolerance;
        for (Eigen::Index i = 0; i < n; ++i)
            if (!passive[static_cast<size_t>(i)] && w[i] > best) {
                best = w[i];
                candidate = i;
            }
        if (candidate < 0) {
            result.converged = true;
            return result;
        }
        passive[static_cast<size_t>(candidate)] = true;

        for (;;) {
            solve_passive(cols, z);
            bool all_positive = true;
            for (size_t c = 0; c < cols.size(); ++c)
                if (z[static_cast<Eigen::Index>(c)] <= 0) {
                    all_positive = false;
                    break;
                }
            if (all_positive) {
                result.x.setZero();
                for (size_t c = 0; c < cols.size(); ++c)
                    result.x[cols[c]] = z[static_cast<Eigen::Index>(c)];
                break;
            }
            // Step toward z only as far as feasibility allows, then drop the
            // coordinates pinned at zero.
            double alpha = std::numeric_limits<double>::infinity();
            for (size_t c = 0; c < cols.size(); ++c) {
                const double zc = z[static_cast<Eigen::Index>(c)];
                if (zc <= 0) {
                    const double xc = result.x[cols[c]];
                    alpha = std::min(alpha, xc / (xc - zc));
                }
            }
            for (size_t c = 0; c < cols.size(); ++c) {
                const Eigen::Index i = cols[c];
                result.x[i] +=
                    alpha * (z[static_cast<Eigen::Index>(c)] - result.x[i]);
            }
            for (size_t c = 0; c < cols.size(); ++c) {
                const Eigen::Index i = cols[c];
                if (result.x[i] <= 1e-14) {
                    result.x[i] = 0;
                    passive[static_cast<size_t>(i)] = false;
                }
            }
        }
    }
    return result;
}

} // namespace opeps
