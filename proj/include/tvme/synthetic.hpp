#pragma once

#include "tvme/series.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace tvme {

/// Slope-path families with known ground truth.
struct BetaPathSpec {
    enum class Kind { Constant, Step, Sine, RandomWalk } kind = Kind::Constant;
    double level = 1.0;        // Constant value / Step first half / RandomWalk start
    double level2 = 1.0;       // Step second half
    std::size_t breakpoint = 0;
    double amplitude = 0.0;    // Sine
    double period = 120.0;     // Sine, in months
    double sigma_v = 0.0;      // RandomWalk increment scale

    static BetaPathSpec constant(double c) {
        BetaPathSpec s;
        s.kind = Kind::Constant;
        s.level = c;
        return s;
    }
    static BetaPathSpec step(double first, double second, std::size_t breakpoint) {
        BetaPathSpec s;
        s.kind = Kind::Step;
        s.level = first;
        s.level2 = second;
        s.breakpoint = breakpoint;
        return s;
    }
    static BetaPathSpec sine(double center, double amplitude, double period) {
        BetaPathSpec s;
        s.kind = Kind::Sine;
        s.level = center;
        s.amplitude = amplitude;
        s.period = period;
        return s;
    }
    static BetaPathSpec random_walk(double sigma_v, double start = 1.0) {
        BetaPathSpec s;
        s.kind = Kind::RandomWalk;
        s.level = start;
        s.sigma_v = sigma_v;
        return s;
    }
};

/// Stationary AR(1) premium process y_t = rho * y_{t-1} + sigma * eps_t,
/// started from the stationary distribution.
struct Ar1Spec {
    double rho = 0.5;
    double sigma = 0.05;
};

/// A fully specified market scenario: n regression observations at horizon
/// k, slope path, observation noise scale, premium process (AR(1) or an
/// explicit path of length n + k), and the seed that makes it reproducible.
struct ScenarioSpec {
    std::size_t n = 200;
    int k = 1;
    double alpha_true = 0.0;
    BetaPathSpec beta_path = BetaPathSpec::constant(1.0);
    double sigma_u = 0.05;
    std::variant<Ar1Spec, std::vector<double>> premium = Ar1Spec{};
    std::uint64_t seed = 0;
    Month start{1900, 1};
};

struct SimulatedMarket {
    PriceSeries spot;      // length n + k
    PriceSeries futures;   // length n + k
    std::vector<double> beta_true;  // length n
};

/// Generate a spot/futures pair whose aligned sample reproduces the drawn
/// (x, y) exactly: the premium is drawn first, x_t = alpha + beta_t * y_t +
/// u_t, log-spot anchors the first k months at zero and builds forward, and
/// futures quotes are spot * exp(premium). Deterministic given the seed
/// (independent substreams for premium, path, and noise).
SimulatedMarket simulate_market(const ScenarioSpec& spec);

}  // namespace tvme
