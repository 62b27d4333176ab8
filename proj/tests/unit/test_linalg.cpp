#include "tvme/linalg.hpp"

#include "tvme/error.hpp"
#include "tvme/rng.hpp"

#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>

using tvme::Matrix;
using tvme::Rng;

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
    return out;
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("ols matches Eigen QR on random designs") {
    Rng rng(42);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 40;
        const std::size_t k = 1 + static_cast<std::size_t>(rng.uniform_index(5));
        Matrix x(n, k);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < k; ++j) x(i, j) = j == 0 ? 1.0 : rng.normal();
            y[i] = rng.normal();
        }
        const auto sol = tvme::ols(y, x);

        Eigen::MatrixXd xe = to_eigen(x);
        Eigen::VectorXd ye = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
        Eigen::VectorXd coef = xe.colPivHouseholderQr().solve(ye);
        for (std::size_t j = 0; j < k; ++j) {
            CHECK(sol.coef[j] == doctest::Approx(coef(static_cast<Eigen::Index>(j))).epsilon(1e-10));
        }
        const double rss = (ye - xe * coef).squaredNorm();
        CHECK(sol.rss == doctest::Approx(rss).epsilon(1e-10));

        Eigen::MatrixXd xtx_inv = (xe.transpose() * xe).inverse();
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b)
                CHECK(sol.xtx_inv(a, b) ==
                      doctest::Approx(xtx_inv(static_cast<Eigen::Index>(a),
                                              static_cast<Eigen::Index>(b)))
                          .epsilon(1e-8));
    }
}

TEST_CASE("ols rejects rank-deficient designs") {
    Matrix x(10, 2);
    std::vector<double> y(10, 1.0);
    for (std::size_t i = 0; i < 10; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = 2.0;  // collinear with the intercept
    }
    CHECK_THROWS_AS(tvme::ols(y, x), tvme::NumericalError);
}

TEST_CASE("tridiagonal solve matches dense solve") {
    Rng rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 50;
        tvme::Tridiagonal t;
        t.diag.resize(n);
        t.off.resize(n - 1);
        for (std::size_t i = 0; i < n - 1; ++i) t.off[i] = rng.normal();
        for (std::size_t i = 0; i < n; ++i) {
            // strictly diagonally dominant => SPD
            double dom = 0.1 + std::abs(rng.normal());
            double nb = (i > 0 ? std::abs(t.off[i - 1]) : 0.0) +
                        (i + 1 < n ? std::abs(t.off[i]) : 0.0);
            t.diag[i] = nb + dom;
        }
        std::vector<double> b(n);
        for (auto& v : b) v = rng.normal();

        const auto x = tvme::solve_spd_tridiagonal(t, b);

        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            dense(i, i) = t.diag[i];
            if (i + 1 < n) {
                dense(i, i + 1) = t.off[i];
                dense(i + 1, i) = t.off[i];
            }
        }
        Eigen::VectorXd xe = dense.ldlt().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), n));
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(x[i] == doctest::Approx(xe(static_cast<Eigen::Index>(i))).epsilon(1e-10));
        }
    }
}

TEST_CASE("tridiagonal solve rejects indefinite systems") {
    tvme::Tridiagonal t;
    t.diag = {1.0, -2.0, 1.0};
    t.off = {0.0, 0.0};
    std::vector<double> b = {1.0, 1.0, 1.0};
    CHECK_THROWS_AS(tvme::solve_spd_tridiagonal(t, b), tvme::NumericalError);
}

TEST_CASE("invert_spd produces an inverse") {
    Rng rng(19);
    const std::size_t n = 4;
    Matrix a(n, n);
    // A = B'B + I is SPD
    Matrix b(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b(i, j) = rng.normal();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = i == j ? 1.0 : 0.0;
            for (std::size_t l = 0; l < n; ++l) s += b(l, i) * b(l, j);
            a(i, j) = s;
        }
    const Matrix inv = tvme::invert_spd(a);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < n; ++l) s += a(i, l) * inv(l, j);
            CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-9).scale(1.0));
        }
    CHECK(tvme::condition_spd(a) >= 1.0);
}

}  // TEST_SUITE
