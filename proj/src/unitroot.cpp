#include "tvme/unitroot.hpp"

#include "tvme/error.hpp"
#include "tvme/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace tvme {

namespace {

// ADF regression of d_t on (level_{t-1}, d_{t-1}, ..., d_{t-k}) over
// observations first..last (inclusive, indices into the detrended series;
// first must be >= k+1). Returns the t-ratio and coefficient of the level
// term plus the pieces the MBIC needs.
struct AdfReg {
    double coef = 0.0;
    double tstat = 0.0;
    double sigma2 = 0.0;  // rss / n_obs (ML convention)
    std::size_t n_obs = 0;
};

AdfReg adf_regression(std::span<const double> y, int k, std::size_t first, std::size_t last) {
    const std::size_t n_obs = last - first + 1;
    const std::size_t ncol = static_cast<std::size_t>(k) + 1;
    Matrix x(n_obs, ncol);
    std::vector<double> d(n_obs);
    AdfReg out;
    out.n_obs = n_obs;
    for (std::size_t r = 0; r < n_obs; ++r) {
        const std::size_t t = first + r;
        d[r] = y[t] - y[t - 1];
        x(r, 0) = y[t - 1];
        for (int j = 1; j <= k; ++j) {
            x(r, static_cast<std::size_t>(j)) = y[t - j] - y[t - j - 1];
        }
    }
    OlsSolution fit = ols(d, x);
    out.coef = fit.coef[0];
    out.sigma2 = fit.rss / static_cast<double>(n_obs);
    const double se = std::sqrt(fit.sigma2 * fit.xtx_inv(0, 0));
    out.tstat = fit.coef[0] / se;
    return out;
}

}  // namespace

namespace {

// Remove the deterministics fitted on the rho-quasi-differenced data.
// rho = 1 + c_bar/T is the ERS local-to-unity rate; rho = 0 degenerates to
// plain least squares on the levels.
std::vector<double> quasi_diff_detrend(std::span<const double> series, Detrend mode, double rho) {
    const std::size_t n = series.size();
    const std::size_t ncol = mode == Detrend::ConstantTrend ? 2 : 1;
    Matrix d(n, ncol);
    std::vector<double> z(n);
    for (std::size_t t = 0; t < n; ++t) {
        z[t] = t == 0 ? series[t] : series[t] - rho * series[t - 1];
        d(t, 0) = t == 0 ? 1.0 : 1.0 - rho;
        if (ncol == 2) {
            const double trend = static_cast<double>(t + 1);
            d(t, 1) = t == 0 ? trend : trend - rho * (trend - 1.0);
        }
    }
    OlsSolution fit = ols(z, d);

    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        double det = fit.coef[0];
        if (ncol == 2) det += fit.coef[1] * static_cast<double>(t + 1);
        out[t] = series[t] - det;
    }
    return out;
}

double ers_rho(Detrend mode, std::size_t n) {
    const double c_bar = mode == Detrend::ConstantTrend ? -13.5 : -7.0;
    return 1.0 + c_bar / static_cast<double>(n);
}

}  // namespace

std::vector<double> gls_detrend(std::span<const double> series, Detrend mode) {
    const std::size_t n = series.size();
    if (n < 20) {
        throw ValidationError("gls_detrend: need at least 20 observations, got " +
                              std::to_string(n));
    }
    return quasi_diff_detrend(series, mode, ers_rho(mode, n));
}

int default_max_lag(std::size_t n) {
    return static_cast<int>(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25));
}

AdfGlsResult adf_gls(std::span<const double> series, Detrend mode, std::optional<int> k_max_opt) {
    const std::size_t n = series.size();
    if (n < 40) {
        throw ValidationError("adf_gls: need at least 40 observations, got " + std::to_string(n));
    }
    const int k_max = k_max_opt.value_or(default_max_lag(n));
    if (k_max < 0) {
        throw ValidationError("adf_gls: k_max must be >= 0, got " + std::to_string(k_max));
    }
    // Common estimation sample: t = k_max+1 .. n-1 (0-based), so every
    // candidate k in 0..k_max has its regressors available.
    const std::size_t first = static_cast<std::size_t>(k_max) + 1;
    if (first + 10 + static_cast<std::size_t>(k_max) > n) {
        throw ValidationError("adf_gls: k_max=" + std::to_string(k_max) +
                              " too large for sample of length " + std::to_string(n));
    }
    const std::size_t last = n - 1;
    const double n_common = static_cast<double>(last - first + 1);

    const std::vector<double> detrended = gls_detrend(series, mode);

    // Modified BIC: ln(sigma2_k) + ln(N) * k / N, every candidate fit on the
    // common sample so the likelihoods are comparable across k. Selection
    // runs on the OLS-detrended series (Perron-Qu refinement): the GLS
    // deterministics are anchored near the first observation, which leaves
    // spurious persistence under strongly stationary data and derails the
    // order choice there.
    const std::vector<double> selection_series = quasi_diff_detrend(series, mode, 0.0);
    int best_k = 0;
    double best_ic = std::numeric_limits<double>::infinity();
    const double penalty = std::log(n_common);
    for (int k = 0; k <= k_max; ++k) {
        const AdfReg reg = adf_regression(selection_series, k, first, last);
        const double ic = std::log(reg.sigma2) + penalty * static_cast<double>(k) / n_common;
        if (ic < best_ic) {
            best_ic = ic;
            best_k = k;
        }
    }

    // Final statistic on the maximal sample for the selected order.
    const AdfReg sel =
        adf_regression(detrended, best_k, static_cast<std::size_t>(best_k) + 1, last);

    AdfGlsResult out;
    out.statistic = sel.tstat;
    out.lags = best_k;
    out.adf_coef = sel.coef;
    out.phi_hat = 1.0 + sel.coef;
    out.detrending = mode;
    out.n = n;
    if (!std::isfinite(out.statistic) || !std::isfinite(out.phi_hat) ||
        std::abs(out.phi_hat) >= 2.0) {
        throw NumericalError("adf_gls: degenerate regression (statistic=" +
                             std::to_string(out.statistic) + ", phi=" +
                             std::to_string(out.phi_hat) + ")");
    }
    return out;
}

}  // namespace tvme
