#include "tvme/synthetic.hpp"

#include "tvme/error.hpp"
#include "tvme/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace tvme {

namespace {

void validate(const ScenarioSpec& spec) {
    if (spec.k < 1 || spec.n < 2) {
        throw ValidationError("simulate_market: need n >= 2 and k >= 1");
    }
    if (!(spec.sigma_u >= 0.0) || !std::isfinite(spec.sigma_u)) {
        throw ValidationError("simulate_market: sigma_u must be >= 0");
    }
    if (spec.beta_path.kind == BetaPathSpec::Kind::Step &&
        spec.beta_path.breakpoint >= spec.n) {
        throw ValidationError("simulate_market: step breakpoint " +
                              std::to_string(spec.beta_path.breakpoint) +
                              " outside sample of length " + std::to_string(spec.n));
    }
    if (spec.beta_path.kind == BetaPathSpec::Kind::Sine && !(spec.beta_path.period > 0.0)) {
        throw ValidationError("simulate_market: sine period must be positive");
    }
    if (const auto* ar1 = std::get_if<Ar1Spec>(&spec.premium)) {
        if (!(std::abs(ar1->rho) < 1.0) || !(ar1->sigma >= 0.0)) {
            throw ValidationError("simulate_market: AR(1) premium needs |rho| < 1, sigma >= 0");
        }
    } else {
        const auto& path = std::get<std::vector<double>>(spec.premium);
        if (path.size() != spec.n + static_cast<std::size_t>(spec.k)) {
            throw ValidationError("simulate_market: explicit premium path must have length n+k=" +
                                  std::to_string(spec.n + static_cast<std::size_t>(spec.k)) +
                                  ", got " + std::to_string(path.size()));
        }
    }
}

std::vector<double> draw_premium(const ScenarioSpec& spec) {
    const std::size_t len = spec.n + static_cast<std::size_t>(spec.k);
    if (const auto* path = std::get_if<std::vector<double>>(&spec.premium)) return *path;
    const Ar1Spec ar1 = std::get<Ar1Spec>(spec.premium);
    Rng rng(derive_seed(spec.seed, 0));
    std::vector<double> y(len);
    const double stationary_sd =
        ar1.rho == 0.0 ? ar1.sigma : ar1.sigma / std::sqrt(1.0 - ar1.rho * ar1.rho);
    y[0] = rng.normal(0.0, stationary_sd);
    for (std::size_t t = 1; t < len; ++t) {
        y[t] = ar1.rho * y[t - 1] + rng.normal(0.0, ar1.sigma);
    }
    return y;
}

std::vector<double> draw_beta_path(const ScenarioSpec& spec) {
    std::vector<double> beta(spec.n);
    const BetaPathSpec& b = spec.beta_path;
    switch (b.kind) {
        case BetaPathSpec::Kind::Constant:
            std::fill(beta.begin(), beta.end(), b.level);
            break;
        case BetaPathSpec::Kind::Step:
            for (std::size_t t = 0; t < spec.n; ++t)
                beta[t] = t < b.breakpoint ? b.level : b.level2;
            break;
        case BetaPathSpec::Kind::Sine:
            for (std::size_t t = 0; t < spec.n; ++t)
                beta[t] = b.level + b.amplitude *
                                        std::sin(2.0 * std::numbers::pi *
                                                 static_cast<double>(t) / b.period);
            break;
        case BetaPathSpec::Kind::RandomWalk: {
            Rng rng(derive_seed(spec.seed, 1));
            double cur = b.level;
            for (std::size_t t = 0; t < spec.n; ++t) {
                beta[t] = cur;
                if (b.sigma_v > 0.0) cur += rng.normal(0.0, b.sigma_v);
            }
            break;
        }
    }
    return beta;
}

}  // namespace

SimulatedMarket simulate_market(const ScenarioSpec& spec) {
    validate(spec);
    const std::size_t len = spec.n + static_cast<std::size_t>(spec.k);
    const std::vector<double> premium = draw_premium(spec);
    const std::vector<double> beta = draw_beta_path(spec);

    Rng noise(derive_seed(spec.seed, 2));
    std::vector<double> x(spec.n);
    for (std::size_t t = 0; t < spec.n; ++t) {
        x[t] = spec.alpha_true + beta[t] * premium[t];
        if (spec.sigma_u > 0.0) x[t] += noise.normal(0.0, spec.sigma_u);
    }

    // log-spot: the k leading months anchor their chains at 0, then
    // log S_{t+k} = log S_t + x_t reproduces the returns exactly.
    std::vector<double> log_spot(len, 0.0);
    for (std::size_t t = 0; t < spec.n; ++t) {
        log_spot[t + static_cast<std::size_t>(spec.k)] = log_spot[t] + x[t];
    }

    SimulatedMarket out;
    out.beta_true = beta;
    std::vector<std::optional<double>> spot_vals(len), fut_vals(len);
    for (std::size_t t = 0; t < len; ++t) {
        spot_vals[t] = std::exp(log_spot[t]);
        fut_vals[t] = std::exp(log_spot[t] + premium[t]);
    }
    out.spot = PriceSeries::create(spec.start, std::move(spot_vals), "spot");
    out.futures = PriceSeries::create(spec.start, std::move(fut_vals), "futures");
    return out;
}

}  // namespace tvme
