#include "expsum/solver.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "expsum/errors.hpp"

namespace expsum {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMat> as_eigen(const DenseMatrix& A) {
    return Eigen::Map<const RowMat>(A.entries().data(), A.rows(), A.cols());
}

// Hager/Higham power-style estimate of ||A^-1||_1 from an LU factorization.
double inverse_one_norm_estimate(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu, int n) {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
    double est = 0.0;
    for (int iter = 0; iter < 5; ++iter) {
        Eigen::VectorXd y = lu.solve(x);
        est = std::max(est, y.lpNorm<1>());
        Eigen::VectorXd xi(n);
        for (int i = 0; i < n; ++i) xi[i] = y[i] >= 0.0 ? 1.0 : -1.0;
        Eigen::VectorXd z = lu.transpose().solve(xi);
        int j = 0;
        double zmax = z.cwiseAbs().maxCoeff(&j);
        if (zmax <= z.dot(x)) break;
        x.setZero();
        x[j] = 1.0;
    }
    return est;
}

// In-place Parlett-Reinsch balancing: diagonal similarity scaling by powers
// of two, so eigenvalues are unchanged but row/column norms are comparable.
void balance(Eigen::MatrixXd& A) {
    const int n = static_cast<int>(A.rows());
    constexpr double radix = 2.0;
    bool done = false;
    while (!done) {
        done = true;
        for (int i = 0; i < n; ++i) {
            double r = A.row(i).cwiseAbs().sum() - std::abs(A(i, i));
            double c = A.col(i).cwiseAbs().sum() - std::abs(A(i, i));
            if (r == 0.0 || c == 0.0) continue;
            const double s = c + r;
            double f = 1.0;
            double g = r / radix;
            while (c < g) {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= radix * radix;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                A.row(i) *= 1.0 / f;
                A.col(i) *= f;
            }
        }
    }
}

std::complex<double> newton_polish(const MonicPolynomial& p, std::complex<double> z) {
    double best_abs = std::abs(p.eval(z));
    std::complex<double> best = z;
    for (int iter = 0; iter < 8; ++iter) {
        const std::complex<double> dp = p.deriv(z);
        if (std::abs(dp) == 0.0) break;
        z -= p.eval(z) / dp;
        const double pa = std::abs(p.eval(z));
        if (pa < best_abs) {
            best_abs = pa;
            best = z;
        } else {
            break;
        }
    }
    return best;
}

}  // namespace

DenseMatrix::DenseMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), entries_(static_cast<std::size_t>(rows) * cols, 0.0) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("DenseMatrix: positive dimensions required");
}

DenseMatrix::DenseMatrix(int rows, int cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("DenseMatrix: positive dimensions required");
    if (entries_.size() != static_cast<std::size_t>(rows) * cols)
        throw std::invalid_argument("DenseMatrix: entries length must equal rows*cols");
}

std::complex<double> MonicPolynomial::eval(std::complex<double> z) const {
    std::complex<double> acc(1.0, 0.0);
    for (int j = degree() - 1; j >= 0; --j) acc = acc * z + low_coeffs[j];
    return acc;
}

std::complex<double> MonicPolynomial::deriv(std::complex<double> z) const {
    const int n = degree();
    std::complex<double> acc(static_cast<double>(n), 0.0);
    for (int j = n - 1; j >= 1; --j) acc = acc * z + static_cast<double>(j) * low_coeffs[j];
    return acc;
}

MonicPolynomial MonicPolynomial::from_roots(const std::vector<double>& roots) {
    if (roots.empty()) throw std::invalid_argument("from_roots: degree >= 1 required");
    std::vector<double> coeffs{1.0};  // full coefficient list, low to high
    for (double r : roots) {
        coeffs.push_back(0.0);
        for (std::size_t j = coeffs.size() - 1; j >= 1; --j) coeffs[j] = coeffs[j - 1] - r * coeffs[j];
        coeffs[0] *= -r;
    }
    coeffs.pop_back();  // drop the leading 1
    return MonicPolynomial{std::move(coeffs)};
}

LuSolution lu_solve(const DenseMatrix& A, const std::vector<double>& b) {
    const int n = A.rows();
    if (A.cols() != n) throw std::invalid_argument("lu_solve: square matrix required");
    if (static_cast<int>(b.size()) != n)
        throw std::invalid_argument("lu_solve: rhs length must match matrix size");

    Eigen::MatrixXd M = as_eigen(A);
    const double a_max = M.cwiseAbs().maxCoeff();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    const double pivot_min = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (pivot_min < 1e-13 * a_max)
        throw SingularMatrixError("collocation matrix is numerically singular (pivot " +
                                  std::to_string(pivot_min) + ")");

    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), n);
    Eigen::VectorXd x = lu.solve(rhs);

    const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
    const double inv_norm1 = inverse_one_norm_estimate(lu, n);

    LuSolution out;
    out.x.assign(x.data(), x.data() + n);
    out.cond_estimate = norm1 * inv_norm1;
    return out;
}

std::vector<std::complex<double>> poly_roots(const MonicPolynomial& p, double tol) {
    const int n = p.degree();
    if (n < 1) throw std::invalid_argument("poly_roots: degree >= 1 required");

    std::vector<std::complex<double>> roots;
    roots.reserve(n);

    if (n == 1) {
        roots.emplace_back(-p.low_coeffs[0], 0.0);
    } else if (n == 2) {
        const double b = p.low_coeffs[1];
        const double c = p.low_coeffs[0];
        const double disc = b * b - 4.0 * c;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            // avoid cancellation: compute the larger-magnitude root first
            const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
            if (q != 0.0) {
                roots.emplace_back(q, 0.0);
                roots.emplace_back(c / q, 0.0);
            } else {  // b = 0, c = 0
                roots.emplace_back(0.0, 0.0);
                roots.emplace_back(0.0, 0.0);
            }
        } else {
            const double im = 0.5 * std::sqrt(-disc);
            roots.emplace_back(-0.5 * b, -im);
            roots.emplace_back(-0.5 * b, im);
        }
    } else {
        // bottom-row companion matrix of p
        Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i + 1 < n; ++i) C(i, i + 1) = 1.0;
        for (int j = 0; j < n; ++j) C(n - 1, j) = -p.low_coeffs[j];
        balance(C);

        Eigen::EigenSolver<Eigen::MatrixXd> es;
        es.setMaxIterations(100 * n);
        es.compute(C, /*computeEigenvectors=*/false);
        if (es.info() != Eigen::Success)
            throw NonConvergenceError("companion-matrix QR iteration did not converge within " +
                                      std::to_string(100 * n) + " sweeps");
        for (int i = 0; i < n; ++i) roots.push_back(es.eigenvalues()[i]);
    }

    for (auto& r : roots) r = newton_polish(p, r);
    std::sort(roots.begin(), roots.end(), [](const std::complex<double>& a, const std::complex<double>& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });

    for (const auto& r : roots) {
        const double scale = 1.0 + std::pow(std::abs(r), n);
        if (!(std::abs(p.eval(r)) / scale <= tol))
            throw NonConvergenceError("root residual " + std::to_string(std::abs(p.eval(r)) / scale) +
                                      " exceeds tolerance " + std::to_string(tol));
    }
    return roots;
}

CollocationFit exp_collocation_solve(const std::vector<double>& rates,
                                     const std::vector<double>& points,
                                     const std::vector<double>& values, bool constant_term) {
    const int n_rates = static_cast<int>(rates.size());
    const int unknowns = n_rates + (constant_term ? 1 : 0);
    const int m = static_cast<int>(points.size());
    if (unknowns < 1) throw std::invalid_argument("exp_collocation_solve: nothing to fit");
    if (static_cast<int>(values.size()) != m)
        throw std::invalid_argument("exp_collocation_solve: points/values length mismatch");
    if (m < unknowns)
        throw std::invalid_argument("exp_collocation_solve: need at least " +
                                    std::to_string(unknowns) + " points, got " + std::to_string(m));

    Eigen::MatrixXd B(m, unknowns);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n_rates; ++j) B(i, j) = std::exp(rates[j] * points[i]);
        if (constant_term) B(i, n_rates) = 1.0;
    }
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(values.data(), m);

    Eigen::VectorXd c;
    if (m == unknowns) {
        const double b_max = B.cwiseAbs().maxCoeff();
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
        if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() < 1e-13 * b_max)
            throw SingularMatrixError("collocation matrix at the sample points is singular");
        c = lu.solve(v);
    } else {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
        if (qr.rank() < unknowns)
            throw SingularMatrixError("collocation matrix is rank-deficient (rank " +
                                      std::to_string(qr.rank()) + " of " + std::to_string(unknowns) +
                                      ")");
        c = qr.solve(v);
    }

    CollocationFit fit;
    fit.coefficients.assign(c.data(), c.data() + unknowns);
    fit.residual = (B * c - v).norm();
    return fit;
}

}  // namespace expsum
