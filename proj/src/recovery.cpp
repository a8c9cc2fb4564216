#include "expsum/recovery.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "expsum/errors.hpp"

namespace expsum {

namespace {

constexpr double kReconWarnRel = 1e-6;   // reconstruction residual warning, relative to max|f|
constexpr double kNearZeroRate = 1e-6;   // a recovered |rate| below this hints at a constant term
constexpr double kVerifyMatchTol = 1e-6; // significant terms must match the reference this tightly

using VecLD = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
using MatLD = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

struct Layout {
    int depth;  // integral columns J_1..J_depth
    int poly;   // polynomial columns 1, t, ..., t^{poly-1}
    int size() const { return depth + poly; }
};

Layout layout_for(RecoveryMode mode, int n_terms) {
    if (mode == RecoveryMode::with_constant) return {n_terms - 1, n_terms};
    return {n_terms, n_terms};  // strict; shifted is transformed before assembly
}

void validate_records(const std::vector<SampleRecord>& records, int depth) {
    for (std::size_t i = 0; i < records.size(); ++i) {
        const SampleRecord& rec = records[i];
        if (!(rec.t >= 0.0) || !std::isfinite(rec.t))
            throw std::invalid_argument("record " + std::to_string(i) +
                                        ": sample time must be finite and >= 0");
        if (static_cast<int>(rec.integrals.size()) < depth)
            throw std::invalid_argument("record " + std::to_string(i) + ": needs integrals J1..J" +
                                        std::to_string(depth) + ", has " +
                                        std::to_string(rec.integrals.size()));
        if (rec.t == 0.0)
            for (int k = 0; k < depth; ++k)
                if (rec.integrals[k] != 0.0)
                    throw std::invalid_argument(
                        "record " + std::to_string(i) +
                        ": all iterated integrals must vanish at t = 0");
        if (i > 0 && !(records[i - 1].t < rec.t))
            throw std::invalid_argument("records must be sorted by strictly increasing t (records " +
                                        std::to_string(i - 1) + " and " + std::to_string(i) + ")");
    }
}

void require_records(const RecoveryProblem& problem, int needed, const char* mode_name) {
    if (static_cast<int>(problem.records.size()) < needed)
        throw InsufficientRecordsError(std::string(mode_name) + " mode with " +
                                       std::to_string(problem.n_terms) + " terms requires at least " +
                                       std::to_string(needed) + " records, have " +
                                       std::to_string(problem.records.size()));
}

void fill_row(Eigen::MatrixXd& A, int row, const SampleRecord& rec, Layout L) {
    for (int k = 0; k < L.depth; ++k) A(row, k) = rec.integrals[k];
    double tp = 1.0;
    for (int j = 0; j < L.poly; ++j) {
        A(row, L.depth + j) = tp;
        tp *= rec.t;
    }
}

// Greedy partial-pivoting row selection: pick, column by column, the record
// whose eliminated entry has the largest magnitude.
std::vector<int> greedy_rows(const std::vector<SampleRecord>& records, Layout L) {
    const int m = static_cast<int>(records.size());
    const int n = L.size();
    Eigen::MatrixXd W(m, n);
    for (int i = 0; i < m; ++i) fill_row(W, i, records[i], L);

    std::vector<int> avail(m);
    std::iota(avail.begin(), avail.end(), 0);
    std::vector<int> sel;
    sel.reserve(n);
    for (int k = 0; k < n; ++k) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < avail.size(); ++j)
            if (std::abs(W(avail[j], k)) > std::abs(W(avail[best], k))) best = j;
        const int i = avail[best];
        sel.push_back(i);
        avail.erase(avail.begin() + static_cast<std::ptrdiff_t>(best));
        const double piv = W(i, k);
        if (piv != 0.0)
            for (int j : avail) W.row(j) -= (W(j, k) / piv) * W.row(i);
    }
    std::sort(sel.begin(), sel.end());
    return sel;
}

// f <- f + s, J_k <- J_k + s t^k / k!; the shifted signal then carries an
// artificial constant term s on top of the original model.
RecoveryProblem shifted_to_constant(const RecoveryProblem& problem) {
    if (!problem.shift_value)
        throw std::invalid_argument("shifted mode requires a shift value");
    const int N = problem.n_terms;
    if (N < 1) throw std::invalid_argument("n_terms >= 1 required");
    require_records(problem, 2 * N + 1, "shifted");
    validate_records(problem.records, N);

    const double s = *problem.shift_value;
    double f_min = problem.records.front().f_value;
    for (const auto& rec : problem.records) f_min = std::min(f_min, rec.f_value);
    if (f_min + s < 0.0)
        throw ShiftTooSmallError("shift " + std::to_string(s) + " leaves sampled values negative; need s >= " +
                                 std::to_string(-f_min));

    RecoveryProblem inner;
    inner.n_terms = N + 1;
    inner.mode = RecoveryMode::with_constant;
    inner.reselect_rows = problem.reselect_rows;
    inner.tol = problem.tol;
    inner.records.reserve(problem.records.size());
    for (const auto& rec : problem.records) {
        SampleRecord out;
        out.t = rec.t;
        out.f_value = rec.f_value + s;
        out.integrals.resize(N);
        double tk = 1.0;  // s t^k / k!
        for (int k = 0; k < N; ++k) {
            tk *= rec.t / static_cast<double>(k + 1);
            out.integrals[k] = rec.integrals[k] + s * tk;
        }
        inner.records.push_back(std::move(out));
    }
    return inner;
}

struct CoreSolve {
    std::vector<double> x;
    double cond = 0.0;
};

// Row and column equilibration before the LU solve: Vandermonde-type columns
// (and rows taken at spread-out times) span wildly different scales once N
// grows, and scaling to unit max-norm keeps the pivot check and condition
// estimate meaningful. A couple of fixed-precision refinement passes against
// the original system then recover most of the accuracy the factorization
// loses; refactorizing for each pass is trivial at these sizes.
// Hager/Higham power-style estimate of ||S^-1||_1 from an LU factorization.
long double inverse_one_norm_estimate_ld(const Eigen::PartialPivLU<MatLD>& lu, int n) {
    VecLD x = VecLD::Constant(n, 1.0L / n);
    long double est = 0.0L;
    for (int iter = 0; iter < 5; ++iter) {
        VecLD y = lu.solve(x);
        est = std::max(est, y.template lpNorm<1>());
        VecLD xi(n);
        for (int i = 0; i < n; ++i) xi[i] = y[i] >= 0.0L ? 1.0L : -1.0L;
        VecLD z = lu.transpose().solve(xi);
        int j = 0;
        long double zmax = z.cwiseAbs().maxCoeff(&j);
        if (zmax <= z.dot(x)) break;
        x.setZero();
        x[j] = 1.0L;
    }
    return est;
}

// The collocation matrix mixes columns whose scales differ by many orders of
// magnitude (iterated integrals vs. powers of t), and its conditioning after
// scaling still grows steeply with the term count. Equilibrate by row and
// column max-norms, then factor and solve in extended precision: a double
// factorization starts returning noise -- or tripping the pivot check on
// perfectly solvable data -- once the scaled condition number nears 1e15.
CoreSolve equilibrated_solve(const CollocationSystem& sys) {
    const int n = static_cast<int>(sys.matrix.rows());
    MatLD S(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) S(i, j) = sys.matrix(i, j);

    std::vector<long double> dr(n, 1.0L), dc(n, 1.0L);
    for (int i = 0; i < n; ++i) {
        const long double m = S.row(i).cwiseAbs().maxCoeff();
        if (m > 0.0L) dr[i] = 1.0L / m;
        S.row(i) *= dr[i];
    }
    for (int j = 0; j < n; ++j) {
        const long double m = S.col(j).cwiseAbs().maxCoeff();
        if (m > 0.0L) dc[j] = 1.0L / m;
        S.col(j) *= dc[j];
    }

    VecLD b(n);
    for (int i = 0; i < n; ++i) b[i] = static_cast<long double>(sys.rhs[i]) * dr[i];

    Eigen::PartialPivLU<MatLD> lu(S);
    const long double pivot_min = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    const long double pivot_max = lu.matrixLU().diagonal().cwiseAbs().maxCoeff();
    if (pivot_min < 1e-17L * std::max(pivot_max, 1.0L))
        throw SingularMatrixError("collocation matrix is numerically singular (pivot " +
                                  std::to_string(static_cast<double>(pivot_min)) + ")");

    VecLD x = lu.solve(b);
    for (int pass = 0; pass < 2; ++pass) {
        const VecLD corr = lu.solve(b - S * x);
        x += corr;
        if (corr.cwiseAbs().maxCoeff() <= 1e-19L * x.cwiseAbs().maxCoeff()) break;
    }

    const long double norm1 = S.cwiseAbs().colwise().sum().maxCoeff();
    const long double cond = norm1 * inverse_one_norm_estimate_ld(lu, n);

    CoreSolve out;
    out.x.resize(n);
    for (int j = 0; j < n; ++j) out.x[j] = static_cast<double>(x[j] * dc[j]);
    out.cond = static_cast<double>(cond);
    return out;
}

MonicPolynomial frobenius_from_x(const std::vector<double>& x, int n) {
    // p(a) = a^n - sum_k x_k a^{n-k}  =>  low_coeffs[n-k] = -x_k
    MonicPolynomial p;
    p.low_coeffs.resize(n);
    for (int k = 1; k <= n; ++k) p.low_coeffs[n - k] = -x[k - 1];
    return p;
}

std::vector<double> real_rates(const MonicPolynomial& frob, const RecoveryTolerances& tol) {
    auto roots = poly_roots(frob, tol.root_residual);
    for (const auto& r : roots)
        if (std::abs(r.imag()) > tol.imag_tol * (1.0 + std::abs(r.real()))) {
            std::ostringstream msg;
            msg << "rate polynomial has complex roots (";
            for (std::size_t i = 0; i < roots.size(); ++i)
                msg << (i ? ", " : "") << roots[i].real() << (roots[i].imag() < 0 ? " - " : " + ")
                    << std::abs(roots[i].imag()) << "i";
            msg << "); the data are not a sum of real exponentials at this order";
            throw ComplexRatesError(msg.str(), roots);
        }

    std::vector<double> rates(roots.size());
    for (std::size_t i = 0; i < roots.size(); ++i) {
        double r = roots[i].real();
        for (int it = 0; it < 3; ++it) {  // re-polish on the real axis
            const double dv = frob.deriv(r).real();
            if (dv == 0.0) break;
            r -= frob.eval(r).real() / dv;
        }
        rates[i] = r;
    }
    std::sort(rates.begin(), rates.end());
    for (std::size_t i = 0; i + 1 < rates.size(); ++i)
        if (rates[i + 1] - rates[i] < tol.duplicate_gap)
            throw DuplicateRatesError("recovered rates " + std::to_string(rates[i]) + " and " +
                                      std::to_string(rates[i + 1]) +
                                      " coincide within " + std::to_string(tol.duplicate_gap) +
                                      "; distinct rates are required");
    return rates;
}

// ---- Nonlinear refinement -------------------------------------------------
//
// The linear pipeline (collocation solve -> companion roots -> coefficient
// fit) is exact in exact arithmetic, but the collocation matrix conditioning
// grows quickly with the number of terms and the root-finding step amplifies
// whatever error the solve leaves. A short Levenberg-Marquardt pass on the
// full parameter vector against every record equation pulls the parameters
// back onto the data; the linear stage has already placed the seed inside
// the convergence basin.

// exp_taylor_remainder in extended precision: the refinement residual is
// evaluated in long double so its floor sits well below the double rounding
// of the data, which is what bounds the attainable parameter accuracy when
// the Jacobian is nearly singular (closely spaced rates).
long double exp_remainder_ld(int k, long double z) {
    if (std::abs(z) > 2.0L) {
        long double value = std::exp(z);
        long double term = 1.0L;
        for (int j = 0; j < k; ++j) {
            value -= term;
            term *= z / static_cast<long double>(j + 1);
        }
        return value;
    }
    long double term = 1.0L;
    for (int j = 1; j <= k; ++j) term *= z / static_cast<long double>(j);
    long double sum = 0.0L;
    for (int j = 0; j < 64; ++j) {
        const long double prev = sum;
        sum += term;
        if (sum == prev) break;
        term *= z / static_cast<long double>(k + j + 1);
    }
    return sum;
}

// J_k of a unit-coefficient exponential e^{at}: R_k(at) / a^k with R_k the
// exponential Taylor remainder.
long double unit_integral_ld(int k, long double a, long double t) {
    long double inv_ak = 1.0L;
    for (int i = 0; i < k; ++i) inv_ak /= a;
    return exp_remainder_ld(k, a * t) * inv_ak;
}

// d/da of unit_integral_ld, via R_k'(z) = R_{k-1}(z):
//   d/da [R_k(at)/a^k] = (t R_{k-1}(at) - k R_k(at)/a) / a^k
long double unit_integral_rate_deriv_ld(int k, long double a, long double t) {
    long double inv_ak = 1.0L;
    for (int i = 0; i < k; ++i) inv_ak /= a;
    return (t * exp_remainder_ld(k - 1, a * t) -
            static_cast<long double>(k) * exp_remainder_ld(k, a * t) / a) *
           inv_ak;
}

struct PolishOutcome {
    std::vector<double> rates;
    std::vector<double> coeffs;
    double constant = 0.0;
    double wrms = std::numeric_limits<double>::infinity();  // final weighted RMS residual
    bool ok = false;
};

// Weighted least squares over every record's value and integral equations.
// Unknowns are [c_1..c_E, a_1..a_E] plus the constant when present. The whole
// iteration runs in extended precision: the Jacobian's smallest singular
// value shrinks like the gap between the closest rates, and once its
// condition number passes ~1e9 a double-precision step solve loses exactly
// the component that separates those rates. Returns ok = false (caller keeps
// the linear-stage result) if the refined rates collide, reach zero, or
// leave the representable range.
PolishOutcome polish_parameters(const std::vector<SampleRecord>& records, int depth,
                                const std::vector<double>& rates0,
                                const std::vector<double>& coeffs0, const double* constant0,
                                const RecoveryTolerances& tol) {
    const int E = static_cast<int>(rates0.size());
    const bool has_c0 = constant0 != nullptr;
    const int nu = 2 * E + (has_c0 ? 1 : 0);
    const int m = static_cast<int>(records.size()) * (1 + depth);
    PolishOutcome out;
    if (m < nu) return out;

    VecLD target(m), weight(m);
    {
        int row = 0;
        for (const auto& rec : records) {
            target[row++] = rec.f_value;
            for (int k = 1; k <= depth; ++k) target[row++] = rec.integrals[k - 1];
        }
    }

    long double t_max = 0.0L;
    for (const auto& rec : records) t_max = std::max<long double>(t_max, rec.t);

    // Inverse-noise weighting. A stored value carries absolute error on the
    // scale of eps times the sum of its terms' magnitudes (equal to eps*|value|
    // when nothing cancels), so each row is scaled by that sum -- floored by
    // |target| so a badly wrong intermediate model cannot zero a row out.
    // Recomputed from the current parameters between rounds.
    auto refresh_weights = [&](const VecLD& u) {
        int row = 0;
        for (const auto& rec : records) {
            const long double t = rec.t;
            long double s = has_c0 ? std::abs(u[2 * E]) : 0.0L;
            for (int n = 0; n < E; ++n) s += std::abs(u[n] * std::exp(u[E + n] * t));
            weight[row] = 1.0L / (std::max(s, std::abs(target[row])) + 1e-300L);
            ++row;
            long double tk = 1.0L;
            for (int k = 1; k <= depth; ++k) {
                tk *= t / static_cast<long double>(k);
                long double v = has_c0 ? std::abs(u[2 * E]) * tk : 0.0L;
                for (int n = 0; n < E; ++n) v += std::abs(u[n] * unit_integral_ld(k, u[E + n], t));
                weight[row] = 1.0L / (std::max(v, std::abs(target[row])) + 1e-300L);
                ++row;
            }
        }
    };

    auto residual = [&](const VecLD& u, VecLD& r) -> bool {
        for (int n = 0; n < E; ++n) {
            if (!std::isfinite(u[E + n]) || std::abs(u[E + n]) < 1e-8L) return false;
            if (std::abs(u[E + n]) * t_max > 700.0L) return false;  // keep exp in range
        }
        int row = 0;
        for (const auto& rec : records) {
            const long double t = rec.t;
            long double f = has_c0 ? u[2 * E] : 0.0L;
            for (int n = 0; n < E; ++n) f += u[n] * std::exp(u[E + n] * t);
            r[row] = (f - target[row]) * weight[row];
            ++row;
            long double tk = 1.0L;  // t^k / k!
            for (int k = 1; k <= depth; ++k) {
                tk *= t / static_cast<long double>(k);
                long double v = has_c0 ? u[2 * E] * tk : 0.0L;
                for (int n = 0; n < E; ++n) v += u[n] * unit_integral_ld(k, u[E + n], t);
                r[row] = (v - target[row]) * weight[row];
                ++row;
            }
        }
        return true;
    };

    auto jacobian = [&](const VecLD& u, MatLD& J) {
        J.setZero();
        int row = 0;
        for (const auto& rec : records) {
            const long double t = rec.t;
            for (int n = 0; n < E; ++n) {
                const long double e = std::exp(u[E + n] * t);
                J(row, n) = e * weight[row];
                J(row, E + n) = u[n] * t * e * weight[row];
            }
            if (has_c0) J(row, 2 * E) = weight[row];
            ++row;
            long double tk = 1.0L;
            for (int k = 1; k <= depth; ++k) {
                tk *= t / static_cast<long double>(k);
                for (int n = 0; n < E; ++n) {
                    J(row, n) = unit_integral_ld(k, u[E + n], t) * weight[row];
                    J(row, E + n) =
                        u[n] * unit_integral_rate_deriv_ld(k, u[E + n], t) * weight[row];
                }
                if (has_c0) J(row, 2 * E) = tk * weight[row];
                ++row;
            }
        }
    };

    VecLD u(nu);
    for (int n = 0; n < E; ++n) u[n] = coeffs0[n];
    for (int n = 0; n < E; ++n) u[E + n] = rates0[n];
    if (has_c0) u[2 * E] = *constant0;

    VecLD r(m), rc(m);
    MatLD J(m, nu);
    long double best = 0.0L;

    // Plain Gauss-Newton with the pseudo-inverse step built in the SVD basis.
    // Steps are taken even when the residual temporarily rises: near-singular
    // Jacobians make the first full step overshoot along the stiff directions
    // while correcting the soft one, and the following step then drops below
    // the starting residual. Monotone (damped) acceptance would reject that
    // path and stall. The best iterate of each round is carried forward, so a
    // diverging iteration still hands back its seed. The outer rounds re-fit
    // the noise weights to the improving parameters and stop once a round no
    // longer makes real progress.
    long double prev_round = std::numeric_limits<long double>::infinity();
    for (int round = 0; round < 8; ++round) {
        refresh_weights(u);
        if (!residual(u, r)) return out;
        best = r.squaredNorm();
        VecLD u_best = u;
        for (int iter = 0; iter < 25; ++iter) {
            jacobian(u, J);
            Eigen::JacobiSVD<MatLD> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const VecLD& sv = svd.singularValues();
            const VecLD utr = svd.matrixU().transpose() * (-r);
            const long double s_max = sv[0];
            if (!(s_max > 0.0L)) break;

            VecLD z(nu);
            for (int k = 0; k < nu; ++k)
                z[k] = (sv[k] > 1e-18L * s_max) ? utr[k] / sv[k] : 0.0L;
            const VecLD delta = svd.matrixV() * z;
            if (!delta.allFinite()) break;

            // Halve the step until it lands in the feasible region (distinct
            // usable rates, exponent range).
            long double scale = 1.0L;
            bool moved = false;
            for (int halved = 0; halved < 12 && !moved; ++halved) {
                const VecLD cand = u + scale * delta;
                if (residual(cand, rc)) {
                    u = cand;
                    r.swap(rc);
                    moved = true;
                } else {
                    scale *= 0.5L;
                }
            }
            if (!moved) break;
            const long double cur = r.squaredNorm();
            if (cur < best) {
                best = cur;
                u_best = u;
            }
            if (scale * delta.cwiseAbs().maxCoeff() <= 1e-17L * (1.0L + u.cwiseAbs().maxCoeff()))
                break;
        }
        u = u_best;
        if (round >= 2 && !(best < 0.25L * prev_round)) break;
        prev_round = best;
    }
    out.wrms = static_cast<double>(std::sqrt(best / static_cast<long double>(m)));

    out.rates.resize(E);
    out.coeffs.resize(E);
    for (int n = 0; n < E; ++n) {
        out.coeffs[n] = static_cast<double>(u[n]);
        out.rates[n] = static_cast<double>(u[E + n]);
    }
    if (has_c0) out.constant = static_cast<double>(u[2 * E]);

    std::vector<double> sorted = out.rates;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        if (sorted[i + 1] - sorted[i] < tol.duplicate_gap) return out;
    for (double a : out.rates)
        if (!std::isfinite(a) || std::abs(a) < 1e-8) return out;
    for (double c : out.coeffs)
        if (!std::isfinite(c)) return out;
    if (has_c0 && !std::isfinite(out.constant)) return out;
    out.ok = true;
    return out;
}

// Draws random rate tuples at the data's plausible scale, projects the
// coefficients out by weighted linear least squares, and Gauss-Newton-polishes
// the most promising tuples. Fallback for when the collocation seed converges
// to a fit whose weighted residual stays far above the rounding floor: that
// gap is a reliable wrong-basin signal, and a seed in the right basin will
// reach the floor.
PolishOutcome rescue_search(const std::vector<SampleRecord>& records, int depth, int E,
                            const std::vector<std::vector<double>>& seed_tuples,
                            const RecoveryTolerances& tol) {
    PolishOutcome best;
    const int m = static_cast<int>(records.size()) * (1 + depth);
    if (m < 2 * E || E < 1) return best;

    long double t_max = 0.0L;
    long double t_min = std::numeric_limits<long double>::infinity();
    for (const auto& rec : records) {
        t_max = std::max<long double>(t_max, rec.t);
        t_min = std::min<long double>(t_min, rec.t);
    }
    if (!(t_max > 0.0L)) return best;
    const long double t_span = std::max(t_max - t_min, 0.1L * t_max);

    double seed_mag = 0.0;
    for (const auto& seed : seed_tuples)
        for (double a : seed)
            if (std::isfinite(a)) seed_mag = std::max(seed_mag, std::abs(a));
    const double a_hi = std::min(700.0 / static_cast<double>(t_max),
                                 std::max(8.0 / static_cast<double>(t_span), 2.0 * seed_mag));
    const double a_lo = std::max(1e-8, 1e-3 * a_hi);

    VecLD y(m), w(m);
    {
        int row = 0;
        for (const auto& rec : records) {
            y[row++] = rec.f_value;
            for (int k = 1; k <= depth; ++k) y[row++] = rec.integrals[k - 1];
        }
        long double scale = 0.0L;
        for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(y[i]));
        for (int i = 0; i < m; ++i) w[i] = 1.0L / (std::abs(y[i]) + 1e-9L * scale + 1e-300L);
    }

    std::mt19937_64 eng(0x9e3779b97f4a7c15ull);  // fixed stream: deterministic results
    auto uni = [&]() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };

    struct Candidate {
        double score;
        std::vector<double> rates, coeffs;
    };
    std::vector<Candidate> top;

    auto project = [&](const std::vector<double>& rates, std::vector<double>& coeffs) {
        MatLD Phi(m, E);
        int row = 0;
        for (const auto& rec : records) {
            const long double t = rec.t;
            for (int q = 0; q < E; ++q)
                Phi(row, q) = std::exp(static_cast<long double>(rates[q]) * t) * w[row];
            ++row;
            for (int k = 1; k <= depth; ++k) {
                for (int q = 0; q < E; ++q)
                    Phi(row, q) = unit_integral_ld(k, rates[q], t) * w[row];
                ++row;
            }
        }
        VecLD rhs(m);
        for (int i = 0; i < m; ++i) rhs[i] = y[i] * w[i];
        Eigen::ColPivHouseholderQR<MatLD> qr(Phi);
        const VecLD c = qr.solve(rhs);
        coeffs.resize(E);
        for (int q = 0; q < E; ++q) coeffs[q] = static_cast<double>(c[q]);
        return static_cast<double>((Phi * c - rhs).norm());
    };

    auto admissible = [&](const std::vector<double>& rates) {
        for (int i = 0; i < E; ++i) {
            if (!std::isfinite(rates[i]) || std::abs(rates[i]) < 1e-8 ||
                std::abs(rates[i]) * static_cast<double>(t_max) > 700.0)
                return false;
            for (int j = i + 1; j < E; ++j)
                if (std::abs(rates[i] - rates[j]) <
                    std::max(10.0 * tol.duplicate_gap, 1e-3 * a_hi))
                    return false;
        }
        return true;
    };

    auto consider = [&](const std::vector<double>& rates) {
        if (static_cast<int>(rates.size()) != E || !admissible(rates)) return;
        Candidate cand;
        cand.rates = rates;
        cand.score = project(rates, cand.coeffs);
        if (!std::isfinite(cand.score)) return;
        top.push_back(std::move(cand));
        std::sort(top.begin(), top.end(),
                  [](const Candidate& A, const Candidate& B) { return A.score < B.score; });
        if (top.size() > 6) top.resize(6);
    };

    for (const auto& seed : seed_tuples) consider(seed);
    const int trials = std::min(2000, 300 * E);
    std::vector<double> cand(E);
    for (int trial = 0; trial < trials; ++trial) {
        for (int q = 0; q < E; ++q) {
            const double mag = a_lo * std::pow(a_hi / a_lo, uni());
            cand[q] = (uni() < 0.5 ? -1.0 : 1.0) * mag;
        }
        consider(cand);
    }

    for (const auto& c : top) {
        PolishOutcome pol = polish_parameters(records, depth, c.rates, c.coeffs, nullptr, tol);
        if (pol.ok && (!best.ok || pol.wrms < best.wrms)) best = pol;
        if (best.ok && best.wrms < 1e-14) break;
    }

    // Term reallocation: when the residual floor is not reached, the weakest
    // recovered term (smallest coefficient magnitude) is usually a wasted one
    // whose true partner merged into a neighbouring term. Re-seed that rate as
    // a split of each other term in turn and keep the refit when it pulls the
    // residual further toward the floor.
    for (int round = 0; round < 3 && best.ok && best.wrms > 1e-14 && E > 1; ++round) {
        double cmax = 0.0;
        int waste = 0;
        for (int q = 0; q < E; ++q) {
            cmax = std::max(cmax, std::abs(best.coeffs[q]));
            if (std::abs(best.coeffs[q]) < std::abs(best.coeffs[waste])) waste = q;
        }
        if (!(cmax > 0.0)) break;
        PolishOutcome improved = best;
        for (int j = 0; j < E; ++j) {
            if (j == waste || std::abs(best.coeffs[j]) < 1e-2 * cmax) continue;
            for (const double h : {0.04, -0.04, 0.08, -0.08, 0.12, -0.12}) {
                std::vector<double> r2 = best.rates;
                r2[waste] = best.rates[j] * (1.0 + h);
                if (!admissible(r2)) continue;
                std::vector<double> c2;
                project(r2, c2);
                PolishOutcome pol = polish_parameters(records, depth, r2, c2, nullptr, tol);
                if (pol.ok && pol.wrms < improved.wrms) improved = pol;
            }
        }
        if (!(improved.wrms < 0.3 * best.wrms)) break;
        best = std::move(improved);
    }
    return best;
}

// Rebuild the collocation solution vector and the companion polynomial from a
// refined parameter set so every reported field describes the same model.
// With S_m = sum_n c_n / a_n^m and x_1..x_E the integral-column block:
//   y_0     = c0 + sum_{k=1..E} x_k S_k
//   j! y_j  = sum_{k=j+1..E} x_k S_{k-j} - x_j c0      (j >= 1, x_j = 0 past E)
void rebuild_solution(std::vector<double>& x, MonicPolynomial& frob,
                      const std::vector<double>& rates, const std::vector<double>& coeffs,
                      double c0, int poly_cols) {
    const int E = static_cast<int>(rates.size());
    frob = MonicPolynomial::from_roots(rates);
    x.assign(static_cast<std::size_t>(E + poly_cols), 0.0);
    for (int k = 1; k <= E; ++k) x[k - 1] = -frob.low_coeffs[E - k];

    std::vector<double> S(E + 1, 0.0);
    for (int mi = 1; mi <= E; ++mi)
        for (int n = 0; n < E; ++n) {
            double p = coeffs[n];
            for (int i = 0; i < mi; ++i) p /= rates[n];
            S[mi] += p;
        }

    double y0 = c0;
    for (int k = 1; k <= E; ++k) y0 += x[k - 1] * S[k];
    x[E] = y0;
    double fact = 1.0;
    for (int j = 1; j < poly_cols; ++j) {
        fact *= static_cast<double>(j);
        double v = 0.0;
        for (int k = j + 1; k <= E; ++k) v += x[k - 1] * S[k - j];
        if (j <= E) v -= x[j - 1] * c0;
        x[E + j] = v / fact;
    }
}

// 2-norm of the value-equation residual, matching the collocation fit's
// residual definition, for a refined parameter set.
double value_residual(const ExpSumModel& model, const std::vector<SampleRecord>& records) {
    double ss = 0.0;
    for (const auto& rec : records) {
        const double d = evaluate(model, rec.t) - rec.f_value;
        ss += d * d;
    }
    return std::sqrt(ss);
}

double max_abs_f(const std::vector<SampleRecord>& records) {
    double m = 0.0;
    for (const auto& rec : records) m = std::max(m, std::abs(rec.f_value));
    return m;
}

void common_warnings(RecoveryResult& res, const RecoveryProblem& problem) {
    if (res.cond_estimate > problem.tol.cond_warn) {
        std::ostringstream w;
        w << "collocation system condition estimate " << res.cond_estimate
          << " exceeds " << problem.tol.cond_warn
          << "; results may be inaccurate (consider different sample points or shifted mode)";
        res.warnings.push_back(w.str());
    }
    for (const auto& term : res.model.terms())
        if (std::abs(term.rate) < kNearZeroRate)
            res.warnings.push_back("recovered rate " + std::to_string(term.rate) +
                                   " is nearly zero; the signal may contain a constant term "
                                   "(with_constant mode handles that case directly)");
    const double scale = max_abs_f(problem.records);
    if (res.reconstruction_residual > kReconWarnRel * scale) {
        std::ostringstream w;
        w << "reconstruction residual " << res.reconstruction_residual << " exceeds "
          << kReconWarnRel * scale << "; the declared number of terms may not match the data";
        res.warnings.push_back(w.str());
    }
}

double reconstruction_residual(const ExpSumModel& model, const std::vector<SampleRecord>& records) {
    double worst = 0.0;
    for (const auto& rec : records)
        worst = std::max(worst, std::abs(evaluate(model, rec.t) - rec.f_value));
    return worst;
}

}  // namespace

const char* to_string(RecoveryMode mode) {
    switch (mode) {
        case RecoveryMode::strict: return "strict";
        case RecoveryMode::shifted: return "shifted";
        case RecoveryMode::with_constant: return "with_constant";
    }
    return "?";
}

std::pair<CollocationSystem, std::vector<int>> assemble_system(const RecoveryProblem& problem) {
    if (problem.mode == RecoveryMode::shifted) return assemble_system(shifted_to_constant(problem));
    if (problem.n_terms < 1) throw std::invalid_argument("n_terms >= 1 required");
    if (problem.mode == RecoveryMode::with_constant && problem.n_terms < 2)
        throw std::invalid_argument(
            "with_constant mode needs at least one exponential term besides the constant");

    const Layout L = layout_for(problem.mode, problem.n_terms);
    require_records(problem, L.size(), to_string(problem.mode));
    validate_records(problem.records, L.depth);

    std::vector<int> sel;
    if (problem.reselect_rows && static_cast<int>(problem.records.size()) > L.size()) {
        sel = greedy_rows(problem.records, L);
    } else {
        sel.resize(L.size());
        std::iota(sel.begin(), sel.end(), 0);
    }

    Eigen::MatrixXd A(L.size(), L.size());
    CollocationSystem sys{DenseMatrix(L.size(), L.size()), std::vector<double>(L.size())};
    for (int i = 0; i < L.size(); ++i) {
        fill_row(A, i, problem.records[sel[i]], L);
        sys.rhs[i] = problem.records[sel[i]].f_value;
    }
    for (int i = 0; i < L.size(); ++i)
        for (int j = 0; j < L.size(); ++j) sys.matrix(i, j) = A(i, j);
    return {std::move(sys), std::move(sel)};
}

RecoveryResult recover(const RecoveryProblem& problem) {
    if (problem.mode != RecoveryMode::strict)
        throw std::invalid_argument("recover: problem mode must be strict (use run() to dispatch)");
    const int N = problem.n_terms;

    auto [sys, sel] = assemble_system(problem);
    CoreSolve core = equilibrated_solve(sys);
    MonicPolynomial frob = frobenius_from_x(core.x, N);
    std::vector<double> rates = real_rates(frob, problem.tol);

    std::vector<double> pts, vals;
    pts.reserve(problem.records.size());
    vals.reserve(problem.records.size());
    for (const auto& rec : problem.records) {
        pts.push_back(rec.t);
        vals.push_back(rec.f_value);
    }
    CollocationFit fit = exp_collocation_solve(rates, pts, vals, false);
    std::vector<double> coeffs(fit.coefficients.begin(), fit.coefficients.begin() + N);
    double fit_residual = fit.residual;

    // Refine the parameters against every record equation unless a rate sits
    // near zero, where the integral closed forms degenerate and the result is
    // better reported as-is together with the near-constant warning.
    double min_rate = std::abs(rates[0]);
    for (double a : rates) min_rate = std::min(min_rate, std::abs(a));
    bool polished = false;
    if (min_rate >= 1e-3) {
        PolishOutcome pol =
            polish_parameters(problem.records, N, rates, coeffs, nullptr, problem.tol);
        // A converged fit of exact-integral data lands at the rounding floor;
        // stopping orders of magnitude above it means the collocation seed led
        // into the wrong basin, so search the rate space for a better one.
        if (!pol.ok || pol.wrms > 3e-15) {
            std::vector<std::vector<double>> seeds{rates};
            if (pol.ok) seeds.push_back(pol.rates);
            PolishOutcome alt = rescue_search(problem.records, N, N, seeds, problem.tol);
            if (alt.ok && (!pol.ok || alt.wrms < pol.wrms)) pol = std::move(alt);
        }
        if (pol.ok) {
            std::vector<int> idx(N);
            std::iota(idx.begin(), idx.end(), 0);
            std::sort(idx.begin(), idx.end(),
                      [&](int a, int b) { return pol.rates[a] < pol.rates[b]; });
            for (int i = 0; i < N; ++i) {
                rates[i] = pol.rates[idx[i]];
                coeffs[i] = pol.coeffs[idx[i]];
            }
            rebuild_solution(core.x, frob, rates, coeffs, 0.0, N);
            polished = true;
        }
    }

    std::vector<ExpSumTerm> terms(N);
    for (int i = 0; i < N; ++i) terms[i] = {coeffs[i], rates[i]};

    RecoveryResult res{ExpSumModel(std::move(terms)),
                       std::move(core.x),
                       std::move(frob),
                       core.cond,
                       fit_residual,
                       0.0,
                       RecoveryMode::strict,
                       {}};
    if (polished) res.collocation_residual = value_residual(res.model, problem.records);
    res.reconstruction_residual = reconstruction_residual(res.model, problem.records);
    common_warnings(res, problem);
    return res;
}

RecoveryResult recover_with_constant(const RecoveryProblem& problem) {
    if (problem.mode != RecoveryMode::with_constant)
        throw std::invalid_argument("recover_with_constant: problem mode must be with_constant");
    const int N = problem.n_terms;  // total terms including the constant
    const int E = N - 1;            // exponential terms

    auto [sys, sel] = assemble_system(problem);  // (2N-1)-square
    CoreSolve core = equilibrated_solve(sys);
    MonicPolynomial frob = frobenius_from_x(core.x, E);
    std::vector<double> rates = real_rates(frob, problem.tol);

    std::vector<double> pts, vals;
    for (const auto& rec : problem.records) {
        pts.push_back(rec.t);
        vals.push_back(rec.f_value);
    }
    CollocationFit fit = exp_collocation_solve(rates, pts, vals, /*constant_term=*/true);
    std::vector<double> coeffs(fit.coefficients.begin(), fit.coefficients.begin() + E);
    double constant = fit.coefficients[E];
    double fit_residual = fit.residual;

    double min_rate = std::abs(rates[0]);
    for (double a : rates) min_rate = std::min(min_rate, std::abs(a));
    bool polished = false;
    if (min_rate >= 1e-3) {
        PolishOutcome pol =
            polish_parameters(problem.records, N - 1, rates, coeffs, &constant, problem.tol);
        if (pol.ok) {
            std::vector<int> idx(E);
            std::iota(idx.begin(), idx.end(), 0);
            std::sort(idx.begin(), idx.end(),
                      [&](int a, int b) { return pol.rates[a] < pol.rates[b]; });
            for (int i = 0; i < E; ++i) {
                rates[i] = pol.rates[idx[i]];
                coeffs[i] = pol.coeffs[idx[i]];
            }
            constant = pol.constant;
            rebuild_solution(core.x, frob, rates, coeffs, constant, N);
            polished = true;
        }
    }

    std::vector<ExpSumTerm> terms(E);
    for (int i = 0; i < E; ++i) terms[i] = {coeffs[i], rates[i]};

    RecoveryResult res{ExpSumModel(std::move(terms), constant),
                       std::move(core.x),
                       std::move(frob),
                       core.cond,
                       fit_residual,
                       0.0,
                       RecoveryMode::with_constant,
                       {}};
    if (polished) res.collocation_residual = value_residual(res.model, problem.records);
    res.reconstruction_residual = reconstruction_residual(res.model, problem.records);
    common_warnings(res, problem);
    return res;
}

RecoveryResult recover_shifted(const RecoveryProblem& problem) {
    if (problem.mode != RecoveryMode::shifted)
        throw std::invalid_argument("recover_shifted: problem mode must be shifted");
    RecoveryProblem inner = shifted_to_constant(problem);
    RecoveryResult res = recover_with_constant(inner);

    const double s = *problem.shift_value;
    res.model = ExpSumModel(res.model.terms(), res.model.constant().value_or(0.0) - s);
    res.mode_used = RecoveryMode::shifted;
    res.reconstruction_residual = reconstruction_residual(res.model, problem.records);
    return res;
}

RecoveryResult run(const RecoveryProblem& problem) {
    switch (problem.mode) {
        case RecoveryMode::strict: return recover(problem);
        case RecoveryMode::shifted: return recover_shifted(problem);
        case RecoveryMode::with_constant: return recover_with_constant(problem);
    }
    throw std::invalid_argument("unknown recovery mode");
}

VerifyReport verify_overdetermined(const RecoveryProblem& problem, int true_n) {
    const int r = problem.n_terms;
    if (true_n < 1 || true_n > r)
        throw std::invalid_argument("verify_overdetermined: need 1 <= true_n <= declared terms");
    require_records(problem, 2 * r, "overdetermined");
    validate_records(problem.records, r);

    const auto& records = problem.records;
    const int m = static_cast<int>(records.size());
    const Layout L{r, r};

    // The declared-size square system is exactly rank-deficient when r exceeds
    // the data's true order, so solve in the minimum-norm least-squares sense
    // over every record instead of picking 2r rows.
    Eigen::MatrixXd A(m, 2 * r);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
        fill_row(A, i, records[i], L);
        b[i] = records[i].f_value;
    }
    Eigen::VectorXd d = Eigen::VectorXd::Ones(2 * r);
    for (int j = 0; j < 2 * r; ++j) {
        const double cmax = A.col(j).cwiseAbs().maxCoeff();
        if (cmax > 0.0) {
            d[j] = 1.0 / cmax;
            A.col(j) *= d[j];
        }
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    Eigen::VectorXd xs = cod.solve(b);
    std::vector<double> x(2 * r);
    for (int j = 0; j < 2 * r; ++j) x[j] = xs[j] * d[j];

    MonicPolynomial frob = frobenius_from_x(x, r);
    auto roots = poly_roots(frob, problem.tol.root_residual);

    VerifyReport report;
    report.tau_zero = 0.0;

    // Partition roots into reals and conjugate pairs; spurious roots of the
    // oversized polynomial may land anywhere in the complex plane. Classify
    // every root first, then match: a real polynomial's complex roots come in
    // conjugate pairs, so each should find a partner.
    std::vector<int> kind(roots.size(), 0);  // 0 real, 1 pair member
    for (std::size_t i = 0; i < roots.size(); ++i)
        if (std::abs(roots[i].imag()) > problem.tol.imag_tol * (1.0 + std::abs(roots[i].real())))
            kind[i] = 1;
    std::vector<int> partner(roots.size(), -1);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (kind[i] != 1 || partner[i] >= 0) continue;
        double best = -1.0;
        int match = -1;
        for (std::size_t j = i + 1; j < roots.size(); ++j) {
            if (kind[j] != 1 || partner[j] >= 0) continue;
            const double dist = std::abs(roots[j] - std::conj(roots[i]));
            if (match < 0 || dist < best) {
                best = dist;
                match = static_cast<int>(j);
            }
        }
        if (match < 0 || best > 1e-6 * (1.0 + std::abs(roots[i]))) {
            report.notes.push_back("unpaired complex root; rate polynomial is inconsistent");
        } else {
            partner[i] = match;
            partner[match] = static_cast<int>(i);
        }
    }

    // Deduplicate real roots that collide (a spurious root can land on a true
    // one); each group contributes one basis column.
    std::vector<int> group_of(roots.size(), -1);
    std::vector<double> group_rate;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < roots.size(); ++i)
        if (kind[i] == 0) order.push_back(i);
    for (std::size_t i : order) {
        const double a = roots[i].real();
        int g = -1;
        for (std::size_t gi = 0; gi < group_rate.size(); ++gi)
            if (std::abs(group_rate[gi] - a) < problem.tol.duplicate_gap) g = static_cast<int>(gi);
        if (g < 0) {
            g = static_cast<int>(group_rate.size());
            group_rate.push_back(a);
        }
        group_of[i] = g;
    }

    std::vector<std::pair<double, double>> pairs;  // (a, b) for e^{at}cos/sin(bt)
    std::vector<int> pair_of(roots.size(), -1);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (kind[i] != 1 || partner[i] < 0 || pair_of[i] >= 0) continue;
        const std::size_t j = static_cast<std::size_t>(partner[i]);
        const double a = 0.5 * (roots[i].real() + roots[j].real());
        const double bb = 0.5 * (std::abs(roots[i].imag()) + std::abs(roots[j].imag()));
        pair_of[i] = pair_of[j] = static_cast<int>(pairs.size());
        pairs.emplace_back(a, bb);
    }

    const int n_cols = static_cast<int>(group_rate.size()) + 2 * static_cast<int>(pairs.size());
    Eigen::MatrixXd B(m, n_cols);
    auto fill_basis = [&]() {
        for (int i = 0; i < m; ++i) {
            const double t = records[i].t;
            int col = 0;
            for (double a : group_rate) B(i, col++) = std::exp(a * t);
            for (const auto& [a, bb] : pairs) {
                B(i, col++) = std::exp(a * t) * std::cos(bb * t);
                B(i, col++) = std::exp(a * t) * std::sin(bb * t);
            }
        }
    };
    fill_basis();

    // Attribute a magnitude to every root: group leaders carry the group
    // coefficient, extra members of a collided group carry zero, and both
    // members of a conjugate pair carry the pair magnitude. Then flag the
    // terms whose magnitude clears the zero threshold.
    std::vector<double> coeff(roots.size(), 0.0);
    auto classify = [&]() {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
        if (qr.rank() < n_cols)
            throw SingularMatrixError(
                "coefficient system for the declared-size recovery is rank-deficient");
        Eigen::VectorXd c = qr.solve(b);
        std::fill(coeff.begin(), coeff.end(), 0.0);
        std::vector<bool> group_taken(group_rate.size(), false);
        for (std::size_t i = 0; i < roots.size(); ++i) {
            if (kind[i] == 0) {
                const int g = group_of[i];
                if (!group_taken[g]) {
                    coeff[i] = c[g];
                    group_taken[g] = true;
                }
            } else if (pair_of[i] >= 0) {
                const int base = static_cast<int>(group_rate.size()) + 2 * pair_of[i];
                coeff[i] = std::hypot(c[base], c[base + 1]);
            }
        }
        double cmax = 0.0;
        for (double v : coeff) cmax = std::max(cmax, std::abs(v));
        report.tau_zero = problem.tol.spurious_factor * cmax;
        report.terms.assign(roots.size(), VerifyTerm{});
        report.n_significant = 0;
        for (std::size_t i = 0; i < roots.size(); ++i) {
            report.terms[i].rate = roots[i].real();
            report.terms[i].coeff = coeff[i];
            report.terms[i].significant = std::abs(coeff[i]) > report.tau_zero;
            if (report.terms[i].significant) ++report.n_significant;
        }
    };
    classify();

    // The min-norm estimate is unrefined; the significant real terms describe
    // the data's true support, so pull them to the residual floor the same way
    // the plain recovery does, refit all coefficients with the updated rates,
    // and re-flag significance.
    {
        std::vector<std::size_t> sig_idx;
        std::vector<double> sig_rates, sig_coeffs;
        bool polishable = report.n_significant > 0;
        for (std::size_t i = 0; i < roots.size(); ++i) {
            if (!report.terms[i].significant) continue;
            if (kind[i] != 0 || std::abs(report.terms[i].rate) < 1e-3) {
                polishable = false;
                break;
            }
            sig_idx.push_back(i);
            sig_rates.push_back(report.terms[i].rate);
            sig_coeffs.push_back(report.terms[i].coeff);
        }
        if (polishable) {
            PolishOutcome pol =
                polish_parameters(records, r, sig_rates, sig_coeffs, nullptr, problem.tol);
            if (pol.ok) {
                for (std::size_t q = 0; q < sig_idx.size(); ++q) {
                    const std::size_t i = sig_idx[q];
                    roots[i] = std::complex<double>(pol.rates[q], 0.0);
                    group_rate[group_of[i]] = pol.rates[q];
                }
                fill_basis();
                classify();
            }
        }
    }

    for (std::size_t i = 0; i < roots.size(); ++i)
        if (kind[i] == 1 && report.terms[i].significant)
            report.notes.push_back("complex rate pair carries a significant coefficient");

    RecoveryProblem ref_problem;
    ref_problem.n_terms = true_n;
    ref_problem.records = records;
    ref_problem.mode = RecoveryMode::strict;
    ref_problem.reselect_rows = problem.reselect_rows;
    ref_problem.tol = problem.tol;
    try {
        RecoveryResult ref = recover(ref_problem);
        report.reference = ref.model.terms();
    } catch (const std::exception& e) {
        report.notes.push_back(std::string("independent recovery at the declared true order failed: ") +
                               e.what());
        report.pass = false;
        return report;
    }

    bool ok = report.n_significant == true_n;
    if (!ok)
        report.notes.push_back("expected " + std::to_string(true_n) + " significant terms, found " +
                               std::to_string(report.n_significant));
    for (const auto& note : report.notes)
        if (note.rfind("complex rate pair", 0) == 0 || note.rfind("unpaired", 0) == 0) ok = false;

    std::vector<VerifyTerm> sig;
    for (const auto& term : report.terms)
        if (term.significant) sig.push_back(term);
    std::sort(sig.begin(), sig.end(),
              [](const VerifyTerm& a, const VerifyTerm& b) { return a.rate < b.rate; });
    const std::size_t n_cmp = std::min(sig.size(), report.reference.size());
    for (std::size_t i = 0; i < n_cmp; ++i) {
        const double dr = std::abs(sig[i].rate - report.reference[i].rate) /
                          std::abs(report.reference[i].rate);
        const double dc = std::abs(sig[i].coeff - report.reference[i].coeff) /
                          std::abs(report.reference[i].coeff);
        report.max_relative_deviation = std::max({report.max_relative_deviation, dr, dc});
    }
    if (report.max_relative_deviation > kVerifyMatchTol) {
        ok = false;
        std::ostringstream w;
        w << "significant terms deviate from the independent recovery by "
          << report.max_relative_deviation;
        report.notes.push_back(w.str());
    }
    report.pass = ok;
    return report;
}

std::vector<SampleRecord> exact_records(const ExpSumModel& model, const std::vector<double>& times,
                                        int n_integrals) {
    if (n_integrals < 1) throw std::invalid_argument("exact_records: n_integrals >= 1 required");
    std::vector<SampleRecord> records;
    records.reserve(times.size());
    for (double t : times) {
        SampleRecord rec;
        rec.t = t;
        rec.f_value = evaluate(model, t);
        rec.integrals.resize(n_integrals);
        for (int k = 1; k <= n_integrals; ++k)
            rec.integrals[k - 1] = iterated_integral_exact(model, k, t);
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<SampleRecord> ingest_records(const DenseSignal& signal,
                                         const std::vector<double>& times, int n_integrals) {
    if (n_integrals < 1) throw std::invalid_argument("ingest_records: n_integrals >= 1 required");
    std::vector<SampleRecord> records;
    records.reserve(times.size());
    for (double t : times) {
        const std::size_t idx = signal.index_of(t);
        SampleRecord rec;
        rec.t = signal.grid()[idx];
        rec.f_value = signal.values()[idx];
        rec.integrals.assign(n_integrals, 0.0);
        if (idx > 0) {
            MomentTable table = moments_from_signal(signal, t, n_integrals - 1);
            for (int k = 1; k <= n_integrals; ++k)
                rec.integrals[k - 1] = integrals_from_moments(table, k);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace expsum
