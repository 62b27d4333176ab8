#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tvme {

/// Minimal row-major dense matrix. Only what the estimators need; anything
/// heavier lives in the test oracles (Eigen) so the two routes stay separate.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Solve the symmetric positive definite system A x = b in place via
/// Cholesky. Throws NumericalError when A is not (numerically) PD.
std::vector<double> solve_spd(Matrix a, std::vector<double> b);

/// Inverse of a symmetric positive definite matrix (Cholesky based).
Matrix invert_spd(const Matrix& a);

/// 1-norm condition number estimate of a square matrix, using invert_spd.
double condition_spd(const Matrix& a);

struct OlsSolution {
    std::vector<double> coef;       // length k
    std::vector<double> residuals;  // length n
    double rss = 0.0;               // sum of squared residuals
    double sigma2 = 0.0;            // rss / (n - k)
    Matrix xtx_inv;                 // k x k
};

/// Ordinary least squares of y on the columns of X via normal equations and
/// Cholesky. Requires n >= k and a numerically full-rank design.
OlsSolution ols(std::span<const double> y, const Matrix& x);

/// Symmetric tridiagonal matrix: diag has length n, off has length n-1.
struct Tridiagonal {
    std::vector<double> diag;
    std::vector<double> off;
};

/// Solve the SPD tridiagonal system T x = b by LDL^T in O(n).
std::vector<double> solve_spd_tridiagonal(const Tridiagonal& t, std::span<const double> b);

}  // namespace tvme
