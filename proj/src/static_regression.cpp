#include "tvme/static_regression.hpp"

#include "tvme/error.hpp"
#include "tvme/linalg.hpp"

#include <array>
#include <cmath>
#include <string>

namespace tvme {

namespace {

// Newey-West covariance of the OLS coefficients: Bartlett-weighted long-run
// score covariance in the usual sandwich. No degrees-of-freedom adjustment,
// so bandwidth 0 reduces exactly to White's estimator.
Matrix hac_covariance(const Matrix& x, const std::vector<double>& resid, int bandwidth,
                      const Matrix& xtx_inv) {
    const std::size_t n = x.rows();
    const std::size_t k = x.cols();
    Matrix omega(k, k);
    for (int lag = 0; lag <= bandwidth; ++lag) {
        // gamma_l = sum_t g_t g_{t-l}' with g_t = x_t * u_t
        Matrix gamma(k, k);
        for (std::size_t t = static_cast<std::size_t>(lag); t < n; ++t) {
            const double scale = resid[t] * resid[t - lag];
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j)
                    gamma(i, j) += scale * x(t, i) * x(t - lag, j);
        }
        const double w = 1.0 - static_cast<double>(lag) / static_cast<double>(bandwidth + 1);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                omega(i, j) += lag == 0 ? gamma(i, j) : w * (gamma(i, j) + gamma(j, i));
    }
    // sandwich: (X'X)^-1 Omega (X'X)^-1
    Matrix tmp(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < k; ++l) s += xtx_inv(i, l) * omega(l, j);
            tmp(i, j) = s;
        }
    Matrix cov(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < k; ++l) s += tmp(i, l) * xtx_inv(l, j);
            cov(i, j) = s;
        }
    return cov;
}

}  // namespace

StaticFit ols_fit(const AlignedSample& sample, std::optional<int> hac_bandwidth) {
    const std::size_t n = sample.n();
    if (n < 10) {
        throw ValidationError("ols_fit: need at least 10 observations, got " + std::to_string(n));
    }
    double mean_y = 0.0;
    for (double v : sample.y) mean_y += v;
    mean_y /= static_cast<double>(n);
    double ssy = 0.0;
    for (double v : sample.y) ssy += (v - mean_y) * (v - mean_y);
    if (!(ssy > 1e-14 * static_cast<double>(n))) {
        throw ValidationError("ols_fit: premium regressor is (numerically) constant; "
                              "slope is not identified");
    }

    Matrix x(n, 2);
    for (std::size_t t = 0; t < n; ++t) {
        x(t, 0) = 1.0;
        x(t, 1) = sample.y[t];
    }
    OlsSolution fit = ols(sample.x, x);

    double mean_x = 0.0;
    for (double v : sample.x) mean_x += v;
    mean_x /= static_cast<double>(n);
    double tss = 0.0;
    for (double v : sample.x) tss += (v - mean_x) * (v - mean_x);
    const double r2 = tss > 0.0 ? 1.0 - fit.rss / tss : 1.0;

    StaticFit out;
    out.alpha = fit.coef[0];
    out.beta = fit.coef[1];
    out.residuals = std::move(fit.residuals);
    out.r2_adj =
        1.0 - (1.0 - r2) * (static_cast<double>(n) - 1.0) / (static_cast<double>(n) - 2.0);
    out.hac_bandwidth = hac_bandwidth.value_or(
        static_cast<int>(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
    if (out.hac_bandwidth < 0) {
        throw ValidationError("ols_fit: HAC bandwidth must be >= 0, got " +
                              std::to_string(out.hac_bandwidth));
    }

    const Matrix cov = hac_covariance(x, out.residuals, out.hac_bandwidth, fit.xtx_inv);
    out.se_alpha = std::sqrt(std::max(0.0, cov(0, 0)));
    out.se_beta = std::sqrt(std::max(0.0, cov(1, 1)));
    return out;
}

HansenLc hansen_lc(const StaticFit& fit, const AlignedSample& sample) {
    const std::size_t n = sample.n();
    if (fit.residuals.size() != n) {
        throw ValidationError("hansen_lc: fit does not belong to this sample (residual length " +
                              std::to_string(fit.residuals.size()) + " vs n=" +
                              std::to_string(n) + ")");
    }
    double sigma2 = 0.0;
    for (double u : fit.residuals) sigma2 += u * u;
    sigma2 /= static_cast<double>(n);

    // Scores for (alpha, beta, variance).
    Matrix v(3, 3);
    std::vector<std::array<double, 3>> scores(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double u = fit.residuals[t];
        scores[t] = {u, u * sample.y[t], u * u - sigma2};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                v(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) +=
                    scores[t][static_cast<std::size_t>(i)] * scores[t][static_cast<std::size_t>(j)];
    }

    Matrix v_inv;
    try {
        v_inv = invert_spd(v);
    } catch (const NumericalError&) {
        throw NumericalError("hansen_lc: score covariance V is singular "
                             "(degenerate residuals; condition not finite)");
    }
    const double cond = condition_spd(v);
    if (cond > 1e12) {
        throw NumericalError("hansen_lc: score covariance V is near singular "
                             "(1-norm condition estimate " + std::to_string(cond) + ")");
    }

    std::array<double, 3> s{0.0, 0.0, 0.0};
    double acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        for (int i = 0; i < 3; ++i) s[static_cast<std::size_t>(i)] += scores[t][static_cast<std::size_t>(i)];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                acc += s[static_cast<std::size_t>(i)] *
                       v_inv(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) *
                       s[static_cast<std::size_t>(j)];
    }

    HansenLc out;
    out.lc_stat = acc / static_cast<double>(n);
    out.critical_value = kHansenLc5pct3Params;
    out.reject_5pct = out.lc_stat > out.critical_value;
    return out;
}

}  // namespace tvme
