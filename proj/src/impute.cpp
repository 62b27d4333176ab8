#include "tvme/impute.hpp"

#include "tvme/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace tvme {

namespace {

constexpr int kSeason = 12;       // monthly
constexpr int kStateDim = 1 + (kSeason - 1);  // level + 11 seasonal lags

using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using StateMat = Eigen::Matrix<double, kStateDim, kStateDim>;

// Observation: z_t = level + current seasonal + eps.
StateVec obs_row() {
    StateVec z = StateVec::Zero();
    z(0) = 1.0;
    z(1) = 1.0;
    return z;
}

// Transition: level random walk; seasonal gamma_{t+1} = -(gamma_t + ... +
// gamma_{t-10}) + omega, with the remaining rows shifting the lag stack.
StateMat transition() {
    StateMat t = StateMat::Zero();
    t(0, 0) = 1.0;
    for (int j = 1; j < kStateDim; ++j) t(1, j) = -1.0;
    for (int j = 2; j < kStateDim; ++j) t(j, j - 1) = 1.0;
    return t;
}

struct FilterPass {
    std::vector<StateVec> a_pred;  // a_t = E[state_t | z_1..t-1]
    std::vector<StateMat> p_pred;
    std::vector<double> innov;     // v_t (0 when missing)
    std::vector<double> innov_var; // F_t (unused when missing)
    std::vector<StateVec> gain;    // K_t = T P Z' / F
    double loglik = 0.0;
};

// Kalman filter over log prices with missing observations skipped. The
// likelihood drops the first kStateDim observed innovations: initialization
// is big-kappa rather than exact diffuse, so those terms are dominated by
// the prior variance.
FilterPass run_filter(const std::vector<double>& z, const std::vector<bool>& present,
                      double var_eps, double var_level, double var_seas, double kappa,
                      double level_anchor) {
    const std::size_t n = z.size();
    const StateMat t_mat = transition();
    const StateVec z_row = obs_row();
    StateMat q = StateMat::Zero();
    q(0, 0) = var_level;
    q(1, 1) = var_seas;

    FilterPass out;
    out.a_pred.resize(n);
    out.p_pred.resize(n);
    out.innov.assign(n, 0.0);
    out.innov_var.assign(n, 1.0);
    out.gain.assign(n, StateVec::Zero());

    StateVec a = StateVec::Zero();
    a(0) = level_anchor;
    StateMat p = kappa * StateMat::Identity();

    int seen = 0;
    constexpr double kLogTwoPi = 1.8378770664093453;
    for (std::size_t i = 0; i < n; ++i) {
        out.a_pred[i] = a;
        out.p_pred[i] = p;
        if (present[i]) {
            const double f = z_row.dot(p * z_row) + var_eps;
            const double v = z[i] - z_row.dot(a);
            const StateVec pz = p * z_row;
            const StateVec k = t_mat * pz / f;
            out.innov[i] = v;
            out.innov_var[i] = f;
            out.gain[i] = k;
            if (seen >= kStateDim) {
                out.loglik -= 0.5 * (kLogTwoPi + std::log(f) + v * v / f);
            }
            ++seen;
            // a_{t+1} = T a + K v ; P_{t+1} = T P L' + Q, L = T - K Z'.
            const StateMat l = t_mat - k * z_row.transpose();
            a = t_mat * a + k * v;
            p = t_mat * p * l.transpose() + q;
        } else {
            a = t_mat * a;
            p = t_mat * p * t_mat.transpose() + q;
        }
        p = 0.5 * (p + p.transpose());  // keep symmetric
    }
    return out;
}

// Backward smoothing recursion (state smoother of Durbin & Koopman); avoids
// inverting predicted covariances.
std::vector<double> smoothed_signal(const std::vector<double>& z, const std::vector<bool>& present,
                                    const FilterPass& f, double /*var_eps*/) {
    const std::size_t n = z.size();
    const StateMat t_mat = transition();
    const StateVec z_row = obs_row();
    std::vector<double> out(n);
    StateVec r = StateVec::Zero();
    for (std::size_t ii = n; ii-- > 0;) {
        if (present[ii]) {
            const StateMat l = t_mat - f.gain[ii] * z_row.transpose();
            r = z_row * (f.innov[ii] / f.innov_var[ii]) + l.transpose() * r;
        } else {
            r = t_mat.transpose() * r;
        }
        const StateVec smoothed = f.a_pred[ii] + f.p_pred[ii] * r;
        out[ii] = z_row.dot(smoothed);
    }
    return out;
}

// Derivative-free Nelder-Mead minimizer, adequate for a 3-parameter
// variance search in log space.
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double> start, double step, int max_iter) {
    const std::size_t dim = start.size();
    std::vector<std::vector<double>> pts(dim + 1, start);
    std::vector<double> val(dim + 1);
    for (std::size_t i = 0; i < dim; ++i) pts[i + 1][i] += step;
    for (std::size_t i = 0; i <= dim; ++i) val[i] = f(pts[i]);

    auto order = [&]() {
        for (std::size_t i = 0; i <= dim; ++i)
            for (std::size_t j = i + 1; j <= dim; ++j)
                if (val[j] < val[i]) {
                    std::swap(val[i], val[j]);
                    std::swap(pts[i], pts[j]);
                }
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        order();
        if (std::abs(val[dim] - val[0]) < 1e-9 * (std::abs(val[0]) + 1.0)) break;
        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t d = 0; d < dim; ++d) centroid[d] += pts[i][d] / double(dim);

        auto blend = [&](double t) {
            std::vector<double> p(dim);
            for (std::size_t d = 0; d < dim; ++d)
                p[d] = centroid[d] + t * (pts[dim][d] - centroid[d]);
            return p;
        };

        std::vector<double> refl = blend(-1.0);
        double f_refl = f(refl);
        if (f_refl < val[0]) {
            std::vector<double> exp_pt = blend(-2.0);
            double f_exp = f(exp_pt);
            if (f_exp < f_refl) {
                pts[dim] = exp_pt;
                val[dim] = f_exp;
            } else {
                pts[dim] = refl;
                val[dim] = f_refl;
            }
        } else if (f_refl < val[dim - 1]) {
            pts[dim] = refl;
            val[dim] = f_refl;
        } else {
            std::vector<double> contr = blend(f_refl < val[dim] ? -0.5 : 0.5);
            double f_contr = f(contr);
            if (f_contr < std::min(f_refl, val[dim])) {
                pts[dim] = contr;
                val[dim] = f_contr;
            } else {
                for (std::size_t i = 1; i <= dim; ++i) {
                    for (std::size_t d = 0; d < dim; ++d)
                        pts[i][d] = pts[0][d] + 0.5 * (pts[i][d] - pts[0][d]);
                    val[i] = f(pts[i]);
                }
            }
        }
    }
    order();
    return pts[0];
}

void validate_for_imputation(const PriceSeries& s) {
    std::string problems;
    const std::size_t n = s.size();
    std::size_t present = n - s.gap_count();
    if (present < 24) {
        problems += "only " + std::to_string(present) + " present values (need >= 24)";
    }
    if (n > 0 && !s.values.front().has_value()) {
        if (!problems.empty()) problems += "; ";
        problems += "leading gap at " + s.start.str();
    }
    if (n > 0 && !s.values.back().has_value()) {
        if (!problems.empty()) problems += "; ";
        problems += "trailing gap at " + s.month_at(n - 1).str();
    }
    std::size_t run = 0;
    for (std::size_t i = 0; i <= n; ++i) {
        if (i < n && !s.values[i].has_value()) {
            ++run;
        } else {
            if (run >= kSeason) {
                if (!problems.empty()) problems += "; ";
                problems += "gap run of " + std::to_string(run) + " months ending at " +
                            s.month_at(i - 1).str() + " (limit 11)";
            }
            run = 0;
        }
    }
    if (!problems.empty()) {
        throw ValidationError("impute_missing: series '" + s.label + "': " + problems);
    }
}

}  // namespace

PriceSeries impute_missing(const PriceSeries& series) {
    if (!series.has_gaps()) return series;
    validate_for_imputation(series);

    const std::size_t n = series.size();
    std::vector<double> z(n, 0.0);
    std::vector<bool> present(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (series.values[i].has_value()) {
            z[i] = std::log(*series.values[i]);
            present[i] = true;
        }
    }

    // Scale reference for variance floors and the prior spread. The prior
    // cannot be arbitrarily diffuse: kappa / floor must stay well inside
    // double precision or the covariance recursions cancel catastrophically.
    double diff_var = 0.0;
    std::size_t diff_n = 0;
    double z_mean = 0.0;
    std::size_t z_n = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!present[i]) continue;
        z_mean += z[i];
        ++z_n;
        if (i > 0 && present[i - 1]) {
            const double d = z[i] - z[i - 1];
            diff_var += d * d;
            ++diff_n;
        }
    }
    z_mean /= static_cast<double>(z_n);
    double z_var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (present[i]) z_var += (z[i] - z_mean) * (z[i] - z_mean);
    }
    z_var /= static_cast<double>(z_n);
    diff_var = diff_n > 0 ? diff_var / static_cast<double>(diff_n) : 1e-4;
    const double scale = std::max({diff_var, z_var, 1e-6});
    const double floor_var = 1e-8 * scale;
    const double kappa = 100.0 * scale;

    auto neg_loglik = [&](const std::vector<double>& theta) {
        const double ve = std::exp(theta[0]) + floor_var;
        const double vl = std::exp(theta[1]) + floor_var;
        const double vs = std::exp(theta[2]) + floor_var;
        const FilterPass f = run_filter(z, present, ve, vl, vs, kappa, z.front());
        return std::isfinite(f.loglik) ? -f.loglik : 1e300;
    };

    const std::vector<double> start = {std::log(0.5 * diff_var), std::log(0.2 * diff_var),
                                       std::log(0.01 * diff_var)};
    const std::vector<double> best = nelder_mead(neg_loglik, start, 2.0, 400);

    const double ve = std::exp(best[0]) + floor_var;
    const double vl = std::exp(best[1]) + floor_var;
    const double vs = std::exp(best[2]) + floor_var;
    const FilterPass f = run_filter(z, present, ve, vl, vs, kappa, z.front());
    const std::vector<double> signal = smoothed_signal(z, present, f, ve);

    PriceSeries out = series;
    for (std::size_t i = 0; i < n; ++i) {
        if (!present[i]) out.values[i] = std::exp(signal[i]);
    }
    return out;
}

}  // namespace tvme
