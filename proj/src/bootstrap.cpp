#include "tvme/bootstrap.hpp"

#include "tvme/error.hpp"
#include "tvme/parallel.hpp"
#include "tvme/rng.hpp"
#include "tvme/static_regression.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

namespace tvme {

int nearest_rank(double p, int n) {
    // Guard against p*n landing an ulp above an exact integer.
    int h = static_cast<int>(std::ceil(p * static_cast<double>(n) - 1e-9));
    return std::clamp(h, 1, n);
}

namespace detail {

EfficiencyBand bootstrap_band_impl(const AlignedSample& sample, const BandConfig& config,
                                   const TvpFit& reference_fit, const TvpFitter& fitter) {
    const std::size_t n = sample.n();
    if (config.n_boot < 200) {
        throw ValidationError("bootstrap_band: need at least 200 replications for usable "
                              "quantiles, got " + std::to_string(config.n_boot));
    }
    if (!(config.level > 0.0 && config.level < 1.0)) {
        throw ValidationError("bootstrap_band: level must lie in (0,1), got " +
                              std::to_string(config.level));
    }

    // Residual pool of the static fit (the null imposes alpha=0, beta=1, so
    // only the noise is taken from the data).
    const StaticFit static_fit = ols_fit(sample);
    const std::vector<double>& pool = static_fit.residuals;

    const std::size_t n_boot = static_cast<std::size_t>(config.n_boot);
    const int max_failures = std::max(1, static_cast<int>(n_boot / 100));  // 1% budget
    constexpr int kMaxAttemptsPerReplication = 64;

    std::vector<std::vector<double>> paths(n_boot);
    std::atomic<int> failures{0};

    parallel_for(n_boot, config.threads, [&](std::size_t i) {
        AlignedSample null_sample;
        null_sample.horizon_k = sample.horizon_k;
        null_sample.start = sample.start;
        null_sample.y = sample.y;
        null_sample.x.resize(n);
        for (int attempt = 0;; ++attempt) {
            if (attempt >= kMaxAttemptsPerReplication) {
                throw NumericalError("bootstrap_band: replication " + std::to_string(i) +
                                     " failed " + std::to_string(attempt) + " times");
            }
            const std::uint64_t stream =
                (static_cast<std::uint64_t>(attempt) << 32) | static_cast<std::uint64_t>(i);
            Rng rng(derive_seed(config.seed, stream));
            for (std::size_t t = 0; t < n; ++t) {
                null_sample.x[t] = sample.y[t] + pool[rng.uniform_index(pool.size())];
            }
            try {
                LambdaChoice lc = config.lambda_policy == BandConfig::LambdaPolicy::Fixed
                                      ? LambdaChoice::fixed(reference_fit.lambda)
                                      : LambdaChoice::auto_select();
                paths[i] = fitter(null_sample, lc, PriorChoice::ols()).beta_path;
                return;
            } catch (const Error&) {
                const int count = failures.fetch_add(1) + 1;
                if (count > max_failures) {
                    throw NumericalError(
                        "bootstrap_band: more than 1% of replications failed (" +
                        std::to_string(count) + " of " + std::to_string(n_boot) + ")");
                }
            }
        }
    });

    EfficiencyBand band;
    band.level = config.level;
    band.replications = config.n_boot;
    band.seed = config.seed;
    band.lambda_used = reference_fit.lambda;
    band.retried_replications = failures.load();
    band.start = sample.start;
    band.horizon_k = sample.horizon_k;
    band.lower.resize(n);
    band.upper.resize(n);

    const int lo_rank = nearest_rank((1.0 - config.level) / 2.0, config.n_boot);
    const int hi_rank = nearest_rank((1.0 + config.level) / 2.0, config.n_boot);
    std::vector<double> column(n_boot);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t i = 0; i < n_boot; ++i) column[i] = paths[i][t];
        std::nth_element(column.begin(), column.begin() + (lo_rank - 1), column.end());
        band.lower[t] = column[static_cast<std::size_t>(lo_rank - 1)];
        std::nth_element(column.begin() + lo_rank, column.begin() + (hi_rank - 1), column.end());
        band.upper[t] = column[static_cast<std::size_t>(hi_rank - 1)];
    }
    return band;
}

}  // namespace detail

EfficiencyBand bootstrap_band(const AlignedSample& sample, const BandConfig& config,
                              const TvpFit& reference_fit) {
    return detail::bootstrap_band_impl(
        sample, config, reference_fit,
        [](const AlignedSample& s, LambdaChoice lc, PriorChoice pc) { return tvp_fit(s, lc, pc); });
}

EfficiencyBand bootstrap_band(const AlignedSample& sample, const BandConfig& config) {
    const TvpFit reference = tvp_fit(sample, LambdaChoice::auto_select());
    return bootstrap_band(sample, config, reference);
}

EfficiencyTimeline detect(const TvpFit& fit, const EfficiencyBand& band) {
    const std::size_t n = fit.beta_path.size();
    if (band.lower.size() != n || band.upper.size() != n) {
        throw ValidationError("detect: fit path length " + std::to_string(n) +
                              " does not match band length " + std::to_string(band.lower.size()));
    }
    EfficiencyTimeline timeline;
    timeline.inefficient.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        timeline.inefficient[t] =
            fit.beta_path[t] < band.lower[t] || fit.beta_path[t] > band.upper[t];
    }

    std::size_t t = 0;
    while (t < n) {
        if (!timeline.inefficient[t]) {
            ++t;
            continue;
        }
        Episode ep;
        ep.first_index = t;
        double excursion = 0.0;
        while (t < n && timeline.inefficient[t]) {
            const double b = fit.beta_path[t];
            excursion += b < band.lower[t] ? band.lower[t] - b : b - band.upper[t];
            ep.last_index = t;
            ++t;
        }
        ep.first_month = band.start.plus(static_cast<int>(ep.first_index));
        ep.last_month = band.start.plus(static_cast<int>(ep.last_index));
        ep.mean_excursion = excursion / static_cast<double>(ep.length());
        timeline.episodes.push_back(ep);
    }
    return timeline;
}

}  // namespace tvme
