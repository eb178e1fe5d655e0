#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "opeps/nnls.hpp"

#include <random>

using namespace opeps;

namespace {

// Karush-Kuhn-Tucker residual check: dual feasibility on the zero set,
// stationarity on the positive set.
void check_kkt(const Eigen::MatrixXd &A, const Eigen::VectorXd &y,
               const Eigen::VectorXd &x, double tol) {
    const Eigen::VectorXd g = A.transpose() * (y - A * x);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        REQUIRE(x[i] >= 0);
        if (x[i] > 1e-10)
            CHECK(std::abs(g[i]) <= tol);
        else
            CHECK(g[i] <= tol);
    }
}

} // namespace

TEST_CASE("identity systems clip negative coordinates") {
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(4, 4);
    Eigen::VectorXd y(4);
    y << 3.0, -2.0, 0.0, 7.5;
    const auto result = nnls(A, y);
    REQUIRE(result.converged);
    CHECK(result.x[0] == doctest::Approx(3.0));
    CHECK(result.x[1] == 0.0);
    CHECK(result.x[2] == 0.0);
    CHECK(result.x[3] == doctest::Approx(7.5));
}

TEST_CASE("non-negative exact solutions are recovered") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.1, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        const int n = 3 + static_cast<int>(rng() % 8);
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                A(i, j) += 0.3 * unit(rng);
        Eigen::VectorXd truth(n);
        for (int i = 0; i < n; ++i)
            truth[i] = unit(rng) * 10;
        const Eigen::VectorXd y = A * truth;
        const auto result = nnls(A, y);
        REQUIRE(result.converged);
        for (int i = 0; i < n; ++i)
            CHECK(result.x[i] == doctest::Approx(truth[i]).epsilon(1e-8));
    }
}

TEST_CASE("solutions satisfy the KKT conditions on random instances") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const int m = 4 + static_cast<int>(rng() % 10);
        const int n = 3 + static_cast<int>(rng() % 8);
        Eigen::MatrixXd A(m, n);
        Eigen::VectorXd y(m);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j)
                A(i, j) = gauss(rng);
            y[i] = gauss(rng) * 5;
        }
        const auto result = nnls(A, y);
        REQUIRE(result.converged);
        check_kkt(A, y, result.x, 1e-8 * (1 + y.norm()));
    }
}

TEST_CASE("the dual tolerance controls termination") {
    Eigen::MatrixXd A(3, 3);
    A << 1, 0.2, 0.1, 0.2, 1, 0.3, 0.1, 0.3, 1;
    Eigen::VectorXd y(3);
    y << 1, -0.5, 0.25;
    const auto tight = nnls(A, y, 1e-12);
    const auto loose = nnls(A, y, 0.5);
    CHECK(tight.converged);
    CHECK(loose.converged);
    CHECK(loose.iterations <= tight.iterations);
}
