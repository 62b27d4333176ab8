#include "tvme/tvp.hpp"

#include "tvme/error.hpp"
#include "tvme/linalg.hpp"
#include "tvme/static_regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace tvme {

namespace {

void require_valid_lambda(double lambda, const char* op) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw ValidationError(std::string(op) + ": lambda must be a positive finite number, got " +
                              std::to_string(lambda));
    }
}

struct JointSolution {
    double alpha = 0.0;
    std::vector<double> beta;
};

// Normal equations of the weighted stack have an arrow shape: alpha couples
// with every beta_t through the observation rows, while the beta block is
// tridiagonal (observations on the diagonal, the lambda-weighted prior and
// first differences on diagonal and off-diagonal). Eliminating the beta
// block first makes the whole solve O(n).
JointSolution solve_joint(const std::vector<double>& x, const std::vector<double>& y,
                          double beta0, double lambda) {
    const std::size_t n = x.size();
    Tridiagonal d;
    d.diag.resize(n);
    d.off.assign(n > 1 ? n - 1 : 0, -lambda);
    std::vector<double> rhs(n);
    double sum_x = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        double penalty_count = 1.0;                    // prior (t=0) or trailing diff (t=n-1)
        if (n > 1 && t > 0 && t + 1 < n) penalty_count = 2.0;
        if (n > 1 && t == 0) penalty_count = 2.0;      // prior + first difference
        d.diag[t] = y[t] * y[t] + lambda * penalty_count;
        rhs[t] = x[t] * y[t];
        sum_x += x[t];
    }
    rhs[0] += lambda * beta0;

    const std::vector<double> z = solve_spd_tridiagonal(d, rhs);
    const std::vector<double> w = solve_spd_tridiagonal(d, y);
    double ytz = 0.0;
    double ytw = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        ytz += y[t] * z[t];
        ytw += y[t] * w[t];
    }
    const double schur = static_cast<double>(n) - ytw;
    if (!(schur > 0.0)) {
        throw NumericalError("tvp: degenerate stacked system (Schur complement " +
                             std::to_string(schur) + ")");
    }
    JointSolution out;
    out.alpha = (sum_x - ytz) / schur;
    out.beta.resize(n);
    for (std::size_t t = 0; t < n; ++t) out.beta[t] = z[t] - out.alpha * w[t];
    return out;
}

// Scale-free innovation decomposition: observation noise 1, state noise and
// prior variance 1/lambda. Returns the log-likelihood with the common noise
// scale sigma_u^2 concentrated out, plus that scale.
struct Concentrated {
    double loglik;
    double sigma_u;
};

Concentrated concentrated_loglik(const std::vector<double>& x, const std::vector<double>& y,
                                 double alpha, double beta0, double lambda) {
    const std::size_t n = x.size();
    const double q = 1.0 / lambda;
    double a = beta0;
    double p = q;
    double sum_sq = 0.0;
    double sum_logf = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double f = y[t] * y[t] * p + 1.0;
        const double e = (x[t] - alpha) - y[t] * a;
        sum_sq += e * e / f;
        sum_logf += std::log(f);
        const double gain = p * y[t] / f;
        a += gain * e;
        p -= gain * y[t] * p;
        p += q;
    }
    const double sigma2 = sum_sq / static_cast<double>(n);
    const double loglik = -0.5 * static_cast<double>(n) *
                              (std::log(2.0 * std::numbers::pi) + 1.0 + std::log(sigma2)) -
                          0.5 * sum_logf;
    return {loglik, std::sqrt(sigma2)};
}

double ols_slope(const AlignedSample& sample) {
    StaticFit f = ols_fit(sample);
    return f.beta;
}

// One-step Prais-Winsten feasible GLS slope: AR(1) rho from the OLS
// residuals, quasi-difference, re-fit.
double gls_slope(const AlignedSample& sample) {
    StaticFit f = ols_fit(sample);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t t = 0; t < f.residuals.size(); ++t) {
        den += f.residuals[t] * f.residuals[t];
        if (t > 0) num += f.residuals[t] * f.residuals[t - 1];
    }
    double rho = den > 0.0 ? num / den : 0.0;
    rho = std::clamp(rho, -0.98, 0.98);

    const std::size_t n = sample.n();
    const double s = std::sqrt(1.0 - rho * rho);
    Matrix design(n, 2);
    std::vector<double> dep(n);
    for (std::size_t t = 0; t < n; ++t) {
        if (t == 0) {
            dep[t] = s * sample.x[t];
            design(t, 0) = s;
            design(t, 1) = s * sample.y[t];
        } else {
            dep[t] = sample.x[t] - rho * sample.x[t - 1];
            design(t, 0) = 1.0 - rho;
            design(t, 1) = sample.y[t] - rho * sample.y[t - 1];
        }
    }
    OlsSolution fit = ols(dep, design);
    return fit.coef[1];
}

double resolve_prior(const AlignedSample& sample, PriorChoice prior) {
    switch (prior.kind) {
        case PriorChoice::Kind::Ols:
            return ols_slope(sample);
        case PriorChoice::Kind::Gls:
            return gls_slope(sample);
        case PriorChoice::Kind::Value:
            return prior.value;
    }
    return prior.value;
}

}  // namespace

StackedSystem build_stacked(const AlignedSample& sample, double beta0, double lambda) {
    require_valid_lambda(lambda, "build_stacked");
    const std::size_t n = sample.n();
    if (n < 3) {
        throw ValidationError("build_stacked: need n >= 3, got " + std::to_string(n));
    }
    StackedSystem sys;
    sys.n = n;
    sys.lambda = lambda;
    sys.beta0 = beta0;
    sys.obs_weight = 1.0;
    sys.state_weight = std::sqrt(lambda);
    sys.response.assign(2 * n, 0.0);
    sys.design.reserve(3 * n);

    for (std::size_t t = 0; t < n; ++t) {
        sys.design.push_back({t, 0, 1.0});
        sys.design.push_back({t, t + 1, sample.y[t]});
        sys.response[t] = sample.x[t];
    }
    // prior row: beta_1 = beta0 + v
    sys.design.push_back({n, 1, 1.0});
    sys.response[n] = beta0;
    // difference rows: beta_{t+1} - beta_t = v
    for (std::size_t j = 1; j < n; ++j) {
        sys.design.push_back({n + j, j, -1.0});
        sys.design.push_back({n + j, j + 1, 1.0});
    }
    return sys;
}

double tvp_profile_loglik(const AlignedSample& sample, double lambda, double beta0) {
    require_valid_lambda(lambda, "tvp_profile_loglik");
    const JointSolution joint = solve_joint(sample.x, sample.y, beta0, lambda);
    return concentrated_loglik(sample.x, sample.y, joint.alpha, beta0, lambda).loglik;
}

TvpFit tvp_fit(const AlignedSample& sample, LambdaChoice lambda, PriorChoice prior) {
    const std::size_t n = sample.n();
    if (n < 3) {
        throw ValidationError("tvp_fit: need n >= 3, got " + std::to_string(n));
    }
    if (!lambda.automatic) require_valid_lambda(lambda.value, "tvp_fit");

    const double beta0 = resolve_prior(sample, prior);

    double chosen = lambda.value;
    if (lambda.automatic) {
        if (n < 30) {
            throw ValidationError("tvp_fit: lambda=auto needs n >= 30, got " + std::to_string(n));
        }
        bool any_information = std::any_of(sample.y.begin(), sample.y.end(),
                                           [](double v) { return v != 0.0; });
        if (!any_information) {
            throw ValidationError("tvp_fit: lambda=auto is not identified when the premium "
                                  "regressor is identically zero");
        }
        // 40-point log grid on [1e-3, 1e6], then one golden-section pass
        // between the neighbors of the grid argmax.
        constexpr int kGridPoints = 40;
        constexpr double kLogLo = -3.0;
        constexpr double kLogHi = 6.0;
        double best_log = kLogLo;
        double best_ll = -std::numeric_limits<double>::infinity();
        int best_idx = 0;
        for (int i = 0; i < kGridPoints; ++i) {
            const double lg =
                kLogLo + (kLogHi - kLogLo) * static_cast<double>(i) / (kGridPoints - 1.0);
            const double ll = tvp_profile_loglik(sample, std::pow(10.0, lg), beta0);
            if (ll > best_ll) {
                best_ll = ll;
                best_log = lg;
                best_idx = i;
            }
        }
        const double step = (kLogHi - kLogLo) / (kGridPoints - 1.0);
        double lo = best_idx == 0 ? best_log : best_log - step;
        double hi = best_idx == kGridPoints - 1 ? best_log : best_log + step;
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = hi - inv_phi * (hi - lo);
        double d = lo + inv_phi * (hi - lo);
        double fc = tvp_profile_loglik(sample, std::pow(10.0, c), beta0);
        double fd = tvp_profile_loglik(sample, std::pow(10.0, d), beta0);
        for (int it = 0; it < 40; ++it) {
            if (fc > fd) {
                hi = d;
                d = c;
                fd = fc;
                c = hi - inv_phi * (hi - lo);
                fc = tvp_profile_loglik(sample, std::pow(10.0, c), beta0);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + inv_phi * (hi - lo);
                fd = tvp_profile_loglik(sample, std::pow(10.0, d), beta0);
            }
        }
        chosen = std::pow(10.0, 0.5 * (lo + hi));
    }

    const JointSolution joint = solve_joint(sample.x, sample.y, beta0, chosen);
    const Concentrated conc =
        concentrated_loglik(sample.x, sample.y, joint.alpha, beta0, chosen);

    TvpFit out;
    out.alpha = joint.alpha;
    out.beta_path = joint.beta;
    out.lambda = chosen;
    out.beta0 = beta0;
    out.loglik = conc.loglik;
    out.sigma_u = conc.sigma_u;
    out.residuals_obs.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        out.residuals_obs[t] = sample.x[t] - out.alpha - out.beta_path[t] * sample.y[t];
    }
    return out;
}

std::vector<double> kalman_smoother_path(const AlignedSample& sample, double lambda, double beta0,
                                         double alpha) {
    require_valid_lambda(lambda, "kalman_smoother_path");
    const std::size_t n = sample.n();
    if (n < 1) {
        throw ValidationError("kalman_smoother_path: empty sample");
    }
    const double q = 1.0 / lambda;

    std::vector<double> a_filt(n), p_filt(n), a_pred(n), p_pred(n);
    double a = beta0;
    double p = q;
    for (std::size_t t = 0; t < n; ++t) {
        a_pred[t] = a;
        p_pred[t] = p;
        const double f = sample.y[t] * sample.y[t] * p + 1.0;
        const double e = (sample.x[t] - alpha) - sample.y[t] * a;
        const double gain = p * sample.y[t] / f;
        a_filt[t] = a + gain * e;
        p_filt[t] = p - gain * sample.y[t] * p;
        a = a_filt[t];
        p = p_filt[t] + q;
    }

    // Rauch-Tung-Striebel backward pass (unit transition).
    std::vector<double> out(n);
    out[n - 1] = a_filt[n - 1];
    for (std::size_t t = n - 1; t-- > 0;) {
        const double c = p_filt[t] / (p_filt[t] + q);
        out[t] = a_filt[t] + c * (out[t + 1] - a_pred[t + 1]);
    }
    return out;
}

}  // namespace tvme
