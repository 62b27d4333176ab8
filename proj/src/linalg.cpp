#include "tvme/linalg.hpp"

#include "tvme/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tvme {

namespace {

// In-place lower Cholesky factor of a symmetric matrix. Returns false when a
// pivot drops below a relative tolerance.
bool cholesky(Matrix& a) {
    const std::size_t n = a.rows();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i)));
    const double tol = scale * 1e-13 + 1e-300;
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > tol)) return false;
        d = std::sqrt(d);
        a(j, j) = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / d;
        }
    }
    return true;
}

void cholesky_solve_inplace(const Matrix& l, std::vector<double>& b) {
    const std::size_t n = l.rows();
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * b[k];
        b[i] = s / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * b[k];
        b[ii] = s / l(ii, ii);
    }
}

double norm1(const Matrix& a) {
    double best = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) col += std::abs(a(i, j));
        best = std::max(best, col);
    }
    return best;
}

}  // namespace

std::vector<double> solve_spd(Matrix a, std::vector<double> b) {
    if (!cholesky(a)) {
        throw NumericalError("solve_spd: matrix is not positive definite");
    }
    cholesky_solve_inplace(a, b);
    return b;
}

Matrix invert_spd(const Matrix& a) {
    const std::size_t n = a.rows();
    Matrix l = a;
    if (!cholesky(l)) {
        throw NumericalError("invert_spd: matrix is not positive definite");
    }
    Matrix inv(n, n);
    std::vector<double> e(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        cholesky_solve_inplace(l, e);
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = e[i];
    }
    return inv;
}

double condition_spd(const Matrix& a) {
    Matrix inv = invert_spd(a);
    return norm1(a) * norm1(inv);
}

OlsSolution ols(std::span<const double> y, const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t k = x.cols();
    if (y.size() != n || n < k || k == 0) {
        throw ValidationError("ols: incompatible dimensions (n=" + std::to_string(n) +
                              ", k=" + std::to_string(k) + ")");
    }
    Matrix xtx(k, k);
    std::vector<double> xty(k, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        auto row = x.row(t);
        for (std::size_t i = 0; i < k; ++i) {
            xty[i] += row[i] * y[t];
            for (std::size_t j = i; j < k; ++j) xtx(i, j) += row[i] * row[j];
        }
    }
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < i; ++j) xtx(i, j) = xtx(j, i);

    OlsSolution out;
    Matrix l = xtx;
    if (!cholesky(l)) {
        throw NumericalError("ols: design matrix is rank deficient");
    }
    out.coef = xty;
    cholesky_solve_inplace(l, out.coef);

    out.residuals.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        auto row = x.row(t);
        double fit = 0.0;
        for (std::size_t i = 0; i < k; ++i) fit += row[i] * out.coef[i];
        out.residuals[t] = y[t] - fit;
        out.rss += out.residuals[t] * out.residuals[t];
    }
    out.sigma2 = n > k ? out.rss / static_cast<double>(n - k) : 0.0;

    out.xtx_inv = Matrix(k, k);
    std::vector<double> e(k);
    for (std::size_t j = 0; j < k; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        cholesky_solve_inplace(l, e);
        for (std::size_t i = 0; i < k; ++i) out.xtx_inv(i, j) = e[i];
    }
    return out;
}

std::vector<double> solve_spd_tridiagonal(const Tridiagonal& t, std::span<const double> b) {
    const std::size_t n = t.diag.size();
    if (t.off.size() + 1 != n || b.size() != n || n == 0) {
        throw ValidationError("solve_spd_tridiagonal: incompatible dimensions");
    }
    // LDL^T: d holds pivots, l holds subdiagonal multipliers.
    std::vector<double> d(n), l(n > 1 ? n - 1 : 0), x(b.begin(), b.end());
    d[0] = t.diag[0];
    if (!(d[0] > 0.0)) throw NumericalError("solve_spd_tridiagonal: non-PD pivot");
    for (std::size_t i = 1; i < n; ++i) {
        l[i - 1] = t.off[i - 1] / d[i - 1];
        d[i] = t.diag[i] - l[i - 1] * t.off[i - 1];
        if (!(d[i] > 0.0)) throw NumericalError("solve_spd_tridiagonal: non-PD pivot");
    }
    for (std::size_t i = 1; i < n; ++i) x[i] -= l[i - 1] * x[i - 1];
    for (std::size_t i = 0; i < n; ++i) x[i] /= d[i];
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= l[i] * x[i + 1];
    return x;
}

}  // namespace tvme
