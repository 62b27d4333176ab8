#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace tvme {

enum class Detrend {
    Constant,       // demean only
    ConstantTrend,  // constant + linear trend
};

struct AdfGlsResult {
    double statistic = 0.0;  // t-ratio of the unit-root coefficient
    int lags = 0;            // augmentation order selected by the MBIC
    double phi_hat = 0.0;    // levels AR(1) magnitude, 1 + adf_coef
    double adf_coef = 0.0;   // raw coefficient on the lagged level
    Detrend detrending = Detrend::ConstantTrend;
    std::size_t n = 0;       // input length
};

/// GLS-detrend a series at the local-to-unity rate (quasi-differencing with
/// rho_bar = 1 + c_bar/T, c_bar = -7 for constant, -13.5 for constant+trend,
/// per Elliott-Rothenberg-Stock). Returns the series minus the fitted
/// deterministic part. Requires length >= 20.
std::vector<double> gls_detrend(std::span<const double> series, Detrend mode);

/// ADF-GLS unit-root test. The augmentation order is chosen by a modified
/// BIC with all candidate regressions fit on the common sample implied by
/// k_max; selection runs on OLS-detrended data (Perron-Qu) while the
/// reported statistic re-estimates the selected regression on the
/// GLS-detrended series over its maximal sample. Requires length >= 40.
/// Default k_max is the Schwert rule floor(12 * (T/100)^(1/4)).
AdfGlsResult adf_gls(std::span<const double> series, Detrend mode,
                     std::optional<int> k_max = std::nullopt);

/// Schwert's default maximum augmentation order.
int default_max_lag(std::size_t n);

/// 1% critical value of the GLS-detrended t-test under constant+trend.
inline constexpr double kAdfGlsTrendCrit1pct = -3.42;

}  // namespace tvme
