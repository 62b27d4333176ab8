#include "tvme/unitroot.hpp"

#include "tvme/error.hpp"
#include "tvme/linalg.hpp"
#include "tvme/parallel.hpp"
#include "tvme/rng.hpp"

#include "doctest.h"

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <vector>

using tvme::Detrend;
using tvme::Rng;

namespace {

std::vector<double> ar1_series(std::uint64_t seed, std::size_t n, double rho, double drift = 0.0,
                               double trend = 0.0) {
    Rng rng(seed);
    std::vector<double> y(n);
    double cur = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        cur = rho * cur + rng.normal();
        y[t] = drift + trend * static_cast<double>(t) + cur;
    }
    return y;
}

// Independent dense route for the GLS detrending: quasi-difference with
// Eigen and solve by QR.
std::vector<double> gls_detrend_oracle(const std::vector<double>& y, Detrend mode) {
    const std::size_t n = y.size();
    const double c_bar = mode == Detrend::ConstantTrend ? -13.5 : -7.0;
    const double rho = 1.0 + c_bar / static_cast<double>(n);
    const std::size_t k = mode == Detrend::ConstantTrend ? 2 : 1;
    Eigen::MatrixXd d(n, k);
    Eigen::VectorXd z(n);
    for (std::size_t t = 0; t < n; ++t) {
        z(t) = t == 0 ? y[0] : y[t] - rho * y[t - 1];
        d(t, 0) = t == 0 ? 1.0 : 1.0 - rho;
        if (k == 2) d(t, 1) = t == 0 ? 1.0 : (t + 1.0) - rho * static_cast<double>(t);
    }
    Eigen::VectorXd delta = d.colPivHouseholderQr().solve(z);
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        double det = delta(0);
        if (k == 2) det += delta(1) * (t + 1.0);
        out[t] = y[t] - det;
    }
    return out;
}

}  // namespace

TEST_SUITE("unitroot") {

TEST_CASE("gls_detrend removes a pure linear trend") {
    std::vector<double> y(100);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] = 3.5 + 0.25 * static_cast<double>(t + 1);
    const auto r = tvme::gls_detrend(y, Detrend::ConstantTrend);
    for (double v : r) CHECK(std::abs(v) < 1e-8);
}

TEST_CASE("gls_detrend maps a constant series to zero") {
    std::vector<double> y(50, 7.25);
    const auto r = tvme::gls_detrend(y, Detrend::Constant);
    for (double v : r) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("gls_detrend agrees with an independent dense oracle") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto y = ar1_series(seed, 150, 0.7, 2.0, 0.05);
        for (Detrend mode : {Detrend::Constant, Detrend::ConstantTrend}) {
            const auto ours = tvme::gls_detrend(y, mode);
            const auto oracle = gls_detrend_oracle(y, mode);
            for (std::size_t t = 0; t < y.size(); ++t) {
                CHECK(ours[t] == doctest::Approx(oracle[t]).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("gls_detrend rejects short series") {
    std::vector<double> y(10, 1.0);
    CHECK_THROWS_AS(tvme::gls_detrend(y, Detrend::Constant), tvme::ValidationError);
}

TEST_CASE("adf_gls statistic and lag are invariant to affine transforms") {
    const auto y = ar1_series(17, 200, 0.5);
    const auto base = tvme::adf_gls(y, Detrend::ConstantTrend, 8);
    for (auto [a, b] : {std::pair{10.0, 3.0}, std::pair{-4.0, -0.5}, std::pair{0.0, 100.0}}) {
        std::vector<double> z(y.size());
        for (std::size_t t = 0; t < y.size(); ++t) z[t] = a + b * y[t];
        const auto r = tvme::adf_gls(z, Detrend::ConstantTrend, 8);
        CHECK(r.lags == base.lags);
        CHECK(r.statistic == doctest::Approx(base.statistic).epsilon(1e-8));
        CHECK(r.phi_hat == doctest::Approx(base.phi_hat).epsilon(1e-8));
    }
}

TEST_CASE("k_max=0 equals a hand-rolled Dickey-Fuller regression") {
    const auto y = ar1_series(23, 120, 0.4);
    const auto r = tvme::adf_gls(y, Detrend::ConstantTrend, 0);
    CHECK(r.lags == 0);

    const auto d = tvme::gls_detrend(y, Detrend::ConstantTrend);
    // one-regressor OLS of diff(d) on lag(d), no deterministics
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t t = 1; t < d.size(); ++t) {
        sxy += d[t - 1] * (d[t] - d[t - 1]);
        sxx += d[t - 1] * d[t - 1];
    }
    const double coef = sxy / sxx;
    double rss = 0.0;
    for (std::size_t t = 1; t < d.size(); ++t) {
        const double e = (d[t] - d[t - 1]) - coef * d[t - 1];
        rss += e * e;
    }
    const double se = std::sqrt(rss / static_cast<double>(d.size() - 2) / sxx);
    CHECK(r.statistic == doctest::Approx(coef / se).epsilon(1e-10));
    CHECK(r.adf_coef == doctest::Approx(coef).epsilon(1e-10));
    CHECK(r.phi_hat == doctest::Approx(1.0 + coef).epsilon(1e-10));
}

TEST_CASE("lag selection is deterministic") {
    const auto y = ar1_series(29, 300, 0.6);
    const auto a = tvme::adf_gls(y, Detrend::ConstantTrend, std::nullopt);
    const auto b = tvme::adf_gls(y, Detrend::ConstantTrend, std::nullopt);
    CHECK(a.lags == b.lags);
    CHECK(a.statistic == b.statistic);
}

TEST_CASE("default k_max follows the Schwert rule") {
    CHECK(tvme::default_max_lag(100) == 12);
    CHECK(tvme::default_max_lag(500) == 17);  // 12 * 5^(1/4) = 17.94 -> 17
    CHECK(tvme::default_max_lag(49) == 10);   // 12 * 0.49^(1/4) -> 10.04 -> 10
}

TEST_CASE("white noise rejects and a random walk mostly does not (smoke)") {
    const int draws = 150;
    std::atomic<int> wn_reject{0}, rw_reject{0}, wn_lag0{0};
    tvme::parallel_for(draws, 0, [&](std::size_t i) {
        Rng rng(tvme::derive_seed(1000, i));
        std::vector<double> wn(300), rw(300);
        double acc = 0.0;
        for (std::size_t t = 0; t < wn.size(); ++t) {
            wn[t] = rng.normal();
            acc += rng.normal();
            rw[t] = acc;
        }
        const auto rn = tvme::adf_gls(wn, Detrend::ConstantTrend, std::nullopt);
        const auto rr = tvme::adf_gls(rw, Detrend::ConstantTrend, std::nullopt);
        if (rn.statistic < tvme::kAdfGlsTrendCrit1pct) ++wn_reject;
        if (rr.statistic < tvme::kAdfGlsTrendCrit1pct) ++rw_reject;
        if (rn.lags == 0) ++wn_lag0;
        CHECK(std::abs(rn.phi_hat) < 2.0);
        CHECK(std::abs(rr.phi_hat) < 2.0);
    });
    CHECK(wn_reject >= static_cast<int>(0.97 * draws));
    CHECK(rw_reject <= static_cast<int>(0.08 * draws));
    CHECK(wn_lag0 >= static_cast<int>(0.75 * draws));
}

TEST_CASE("bad arguments are rejected") {
    std::vector<double> y(30, 1.0);
    CHECK_THROWS_AS(tvme::adf_gls(y, Detrend::Constant, 0), tvme::ValidationError);  // too short
    const auto longer = ar1_series(5, 60, 0.2);
    CHECK_THROWS_AS(tvme::adf_gls(longer, Detrend::Constant, 45), tvme::ValidationError);
    CHECK_THROWS_AS(tvme::adf_gls(longer, Detrend::Constant, -1), tvme::ValidationError);
}

}  // TEST_SUITE
