#pragma once

#include "tvme/series.hpp"
#include "tvme/tvp.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace tvme {

struct BandConfig {
    int n_boot = 5000;
    double level = 0.95;
    std::uint64_t seed = 0;
    enum class LambdaPolicy {
        Fixed,           // reuse the variance ratio selected on the real data
        PerReplication,  // re-select inside every replication
    };
    LambdaPolicy lambda_policy = LambdaPolicy::Fixed;
    int threads = 0;  // 0 = hardware concurrency
};

/// Pointwise bootstrap bounds for the slope path under the unbiasedness null
/// (alpha, beta_1..beta_n) = (0, 1..1): residuals of the static fit are
/// resampled with replacement, the dependent side is regenerated as
/// x*_t = y_t + u*_t with the premium path held fixed, and the band is the
/// pointwise nearest-rank quantile pair of the replicated slope paths.
struct EfficiencyBand {
    double level = 0.95;
    std::vector<double> lower;
    std::vector<double> upper;
    int replications = 0;
    std::uint64_t seed = 0;
    double null_alpha = 0.0;
    double null_beta = 1.0;
    double lambda_used = 0.0;  // reference variance ratio (Fixed policy)
    int retried_replications = 0;
    Month start;
    int horizon_k = 1;
};

/// Build the band; the reference fit supplies the variance ratio reused
/// under the Fixed policy.
EfficiencyBand bootstrap_band(const AlignedSample& sample, const BandConfig& config,
                              const TvpFit& reference_fit);

/// Convenience overload: runs tvp_fit(sample, auto) for the reference.
EfficiencyBand bootstrap_band(const AlignedSample& sample, const BandConfig& config);

/// One maximal run of consecutive inefficient months.
struct Episode {
    std::size_t first_index = 0;
    std::size_t last_index = 0;  // inclusive
    Month first_month;
    Month last_month;
    double mean_excursion = 0.0;  // mean distance outside the band

    std::size_t length() const { return last_index - first_index + 1; }
};

/// Per-month efficiency flags plus the episode decomposition. A month is
/// efficient exactly when lower_t <= beta_t <= upper_t; episodes partition
/// the inefficient months into maximal runs.
struct EfficiencyTimeline {
    std::vector<bool> inefficient;
    std::vector<Episode> episodes;
};

EfficiencyTimeline detect(const TvpFit& fit, const EfficiencyBand& band);

/// Nearest-rank order statistic index (1-based) for probability p out of n.
int nearest_rank(double p, int n);

namespace detail {

using TvpFitter =
    std::function<TvpFit(const AlignedSample&, LambdaChoice, PriorChoice)>;

/// Implementation entry point with an injectable fitter (tests use it to
/// exercise the retry/abort machinery).
EfficiencyBand bootstrap_band_impl(const AlignedSample& sample, const BandConfig& config,
                                   const TvpFit& reference_fit, const TvpFitter& fitter);

}  // namespace detail

}  // namespace tvme
