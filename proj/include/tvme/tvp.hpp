#pragma once

#include "tvme/series.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace tvme {

/// Time-varying-slope fit of x_t = alpha + beta_t * y_t + u_t with the
/// random-walk law beta_{t+1} = beta_t + v_t, estimated in one shot as a
/// stacked least-squares problem (observation block over state-difference
/// block). lambda = sigma_u^2 / sigma_v^2 controls the smoothness of the
/// path; the fit is identical to the fixed-interval Kalman smoother of the
/// corresponding state-space model.
struct TvpFit {
    double alpha = 0.0;
    std::vector<double> beta_path;      // length n
    double lambda = 1.0;                // variance ratio actually used
    double beta0 = 0.0;                 // prior initial state
    std::vector<double> residuals_obs;  // x_t - alpha - beta_t * y_t
    double loglik = 0.0;                // concentrated Gaussian log-likelihood
    double sigma_u = 0.0;               // ML observation noise scale
};

/// Explicit stacked form of the joint system: 2n rows (n observation rows,
/// then one prior row and n-1 first-difference rows) over n+1 columns
/// (alpha, beta_1..beta_n). Stored unweighted; the generalized least-squares
/// problem scales the state block by state_weight = sqrt(lambda).
struct StackedSystem {
    struct Entry {
        std::size_t row;
        std::size_t col;
        double value;
    };
    std::size_t n = 0;
    double lambda = 1.0;
    double beta0 = 0.0;
    std::vector<Entry> design;
    std::vector<double> response;  // x-block, then beta0, then zeros
    double obs_weight = 1.0;
    double state_weight = 1.0;

    std::size_t rows() const { return 2 * n; }
    std::size_t cols() const { return n + 1; }
};

/// Materialize the stacked system (mainly for inspection and for dense
/// oracles; the solver works on the banded normal equations directly).
/// Requires lambda > 0 and n >= 3.
StackedSystem build_stacked(const AlignedSample& sample, double beta0, double lambda);

struct LambdaChoice {
    bool automatic = false;
    double value = 1.0;

    static LambdaChoice auto_select() { return {true, 0.0}; }
    static LambdaChoice fixed(double v) { return {false, v}; }
};

struct PriorChoice {
    enum class Kind { Ols, Gls, Value } kind = Kind::Ols;
    double value = 0.0;

    static PriorChoice ols() { return {Kind::Ols, 0.0}; }
    static PriorChoice gls() { return {Kind::Gls, 0.0}; }
    static PriorChoice fixed(double v) { return {Kind::Value, v}; }
};

/// Fit the time-varying path. When lambda is auto-selected it maximizes the
/// concentrated Gaussian log-likelihood over a 40-point log grid on
/// [1e-3, 1e6], refined once by golden section (requires n >= 30). The prior
/// beta0 defaults to the full-sample OLS slope.
TvpFit tvp_fit(const AlignedSample& sample, LambdaChoice lambda,
               PriorChoice prior = PriorChoice::ols());

/// Fixed-interval (RTS) smoother path for the scalar-state model with alpha
/// held fixed. Independent recursion used to cross-check the stacked solver;
/// accepts any n >= 1.
std::vector<double> kalman_smoother_path(const AlignedSample& sample, double lambda, double beta0,
                                         double alpha);

/// Concentrated Gaussian log-likelihood of the state-space form at the given
/// lambda (alpha profiled out through the joint solve).
double tvp_profile_loglik(const AlignedSample& sample, double lambda, double beta0);

}  // namespace tvme
