#pragma once

#include "tvme/series.hpp"

#include <optional>
#include <vector>

namespace tvme {

/// Time-invariant fit of the premium regression x_t = alpha + beta * y_t +
/// u_t with Newey-West (Bartlett kernel) standard errors.
struct StaticFit {
    double alpha = 0.0;
    double beta = 0.0;
    double se_alpha = 0.0;  // HAC
    double se_beta = 0.0;   // HAC
    double r2_adj = 0.0;
    std::vector<double> residuals;
    int hac_bandwidth = 0;
    std::optional<double> lc_stat;  // filled once hansen_lc has run
};

/// OLS of the spot return on (1, premium). HAC bandwidth defaults to the
/// automatic rule floor(4 * (n/100)^(2/9)); bandwidth 0 reduces to White's
/// heteroskedasticity-only variance. Requires n >= 10 and a non-constant
/// premium (collinearity error otherwise).
StaticFit ols_fit(const AlignedSample& sample,
                  std::optional<int> hac_bandwidth = std::nullopt);

struct HansenLc {
    double lc_stat = 0.0;
    bool reject_5pct = false;
    double critical_value = 0.0;
};

/// Hansen's joint parameter-constancy statistic over (alpha, beta, variance),
/// i.e. the L statistic "with variance": scores f_t = (u_t, u_t*y_t,
/// u_t^2 - sigma2), L_C = n^-1 sum_i S_i' V^-1 S_i with V = sum f_t f_t'.
/// The 5% decision compares against the 3-parameter critical value 1.01.
HansenLc hansen_lc(const StaticFit& fit, const AlignedSample& sample);

/// 5% critical value of Hansen's L statistic for 3 parameters (Hansen 1992,
/// Journal of Policy Modeling table of L_C points).
inline constexpr double kHansenLc5pct3Params = 1.01;

}  // namespace tvme
