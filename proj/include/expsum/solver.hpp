#pragma once

#include <complex>
#include <vector>

namespace expsum {

/// Row-major dense real matrix, immutable size.
class DenseMatrix {
  public:
    DenseMatrix(int rows, int cols);
    DenseMatrix(int rows, int cols, std::vector<double> entries);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double operator()(int i, int j) const { return entries_[static_cast<std::size_t>(i) * cols_ + j]; }
    double& operator()(int i, int j) { return entries_[static_cast<std::size_t>(i) * cols_ + j]; }
    const std::vector<double>& entries() const { return entries_; }

  private:
    int rows_;
    int cols_;
    std::vector<double> entries_;
};

/// p(a) = a^N + low_coeffs[N-1] a^{N-1} + ... + low_coeffs[0], leading
/// coefficient implicitly 1.
struct MonicPolynomial {
    std::vector<double> low_coeffs;

    int degree() const { return static_cast<int>(low_coeffs.size()); }
    std::complex<double> eval(std::complex<double> z) const;
    std::complex<double> deriv(std::complex<double> z) const;

    /// Expand prod (a - r_i) into monic coefficient form.
    static MonicPolynomial from_roots(const std::vector<double>& roots);
};

struct LuSolution {
    std::vector<double> x;
    double cond_estimate = 0.0;  // ||A||_1 * estimated ||A^-1||_1
};

/// Solve A x = b by LU with partial pivoting. Throws SingularMatrixError when
/// a pivot magnitude falls below 1e-13 * max|A_ij|.
LuSolution lu_solve(const DenseMatrix& A, const std::vector<double>& b);

/// All roots of p, via closed forms for degree <= 2 and the balanced
/// companion-matrix QR iteration above that, Newton-polished, sorted by
/// (real, imag) ascending. Every returned root r satisfies
/// |p(r)|/(1+|r|^N) <= tol, else NonConvergenceError.
std::vector<std::complex<double>> poly_roots(const MonicPolynomial& p, double tol = 1e-8);

struct CollocationFit {
    std::vector<double> coefficients;  // one per rate, constant appended last if requested
    double residual = 0.0;             // 2-norm of the collocation residual
};

/// Fit sum_n c_n e^{rate_n t_i} (+ c0 if constant_term) to values at points.
/// Square systems solve exactly by LU; overdetermined ones by column-pivoted
/// QR least squares. Throws SingularMatrixError on numerical rank deficiency.
CollocationFit exp_collocation_solve(const std::vector<double>& rates,
                                     const std::vector<double>& points,
                                     const std::vector<double>& values, bool constant_term);

}  // namespace expsum
