#include "expsum/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace expsum {

namespace {

bool uniform_triple(double h1, double h2) {
    return std::abs(h1 - h2) <= 1e-9 * std::max(h1, h2);
}

// Definite integral of the tabulated values over grid[0..last]: Simpson on
// pairs of equal panels, trapezoid on nonuniform triples and a trailing odd
// panel.
double integrate_to(const std::vector<double>& grid, const std::vector<double>& y,
                    std::size_t last) {
    double acc = 0.0;
    std::size_t i = 0;
    while (i + 2 <= last) {
        const double h1 = grid[i + 1] - grid[i];
        const double h2 = grid[i + 2] - grid[i + 1];
        if (uniform_triple(h1, h2)) {
            acc += (h1 + h2) / 6.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
        } else {
            acc += 0.5 * h1 * (y[i] + y[i + 1]) + 0.5 * h2 * (y[i + 1] + y[i + 2]);
        }
        i += 2;
    }
    if (i + 1 <= last) acc += 0.5 * (grid[i + 1] - grid[i]) * (y[i] + y[i + 1]);
    return acc;
}

// Cumulative integral F with F[0] = 0. Uniform pairs of panels get the
// Simpson-consistent split
//   F[i+1] = F[i] + h/12 (5 y_i + 8 y_{i+1} - y_{i+2})
//   F[i+2] = F[i] + h/3  (y_i + 4 y_{i+1} + y_{i+2})
// so the even points match plain composite Simpson exactly.
std::vector<double> cumulative(const std::vector<double>& grid, const std::vector<double>& y) {
    const std::size_t n = grid.size();
    std::vector<double> F(n, 0.0);
    std::size_t i = 0;
    while (i + 2 < n) {
        const double h1 = grid[i + 1] - grid[i];
        const double h2 = grid[i + 2] - grid[i + 1];
        if (uniform_triple(h1, h2)) {
            const double h = 0.5 * (h1 + h2);
            F[i + 1] = F[i] + h / 12.0 * (5.0 * y[i] + 8.0 * y[i + 1] - y[i + 2]);
            F[i + 2] = F[i] + h / 3.0 * (y[i] + 4.0 * y[i + 1] + y[i + 2]);
        } else {
            F[i + 1] = F[i] + 0.5 * h1 * (y[i] + y[i + 1]);
            F[i + 2] = F[i + 1] + 0.5 * h2 * (y[i + 1] + y[i + 2]);
        }
        i += 2;
    }
    if (i + 1 < n)
        F[i + 1] = F[i] + 0.5 * (grid[i + 1] - grid[i]) * (y[i] + y[i + 1]);
    return F;
}

}  // namespace

DenseSignal::DenseSignal(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (grid_.size() < 3)
        throw std::invalid_argument("DenseSignal: at least 3 grid points required");
    if (grid_.size() != values_.size())
        throw std::invalid_argument("DenseSignal: grid and values length mismatch");
    if (grid_.front() != 0.0)
        throw std::invalid_argument("DenseSignal: grid must start at 0");
    for (std::size_t i = 0; i + 1 < grid_.size(); ++i)
        if (!(grid_[i] < grid_[i + 1]))
            throw std::invalid_argument("DenseSignal: grid must be strictly increasing");
    for (double v : values_)
        if (!std::isfinite(v))
            throw std::invalid_argument("DenseSignal: non-finite sample value");
}

std::size_t DenseSignal::index_of(double t) const {
    auto it = std::lower_bound(grid_.begin(), grid_.end(), t);
    std::size_t idx = static_cast<std::size_t>(it - grid_.begin());
    if (idx == grid_.size() || (idx > 0 && t - grid_[idx - 1] < grid_[idx] - t)) --idx;
    if (std::abs(grid_[idx] - t) > 1e-9 * std::max(1.0, std::abs(t)))
        throw std::invalid_argument("requested time " + std::to_string(t) +
                                    " is not a grid point");
    return idx;
}

double integrals_from_moments(const MomentTable& table, int k) {
    if (k < 1) throw std::invalid_argument("integrals_from_moments: k >= 1 required");
    if (static_cast<int>(table.moments.size()) < k)
        throw std::invalid_argument("integrals_from_moments: need moments m_0..m_" +
                                    std::to_string(k - 1) + ", have " +
                                    std::to_string(table.moments.size()));
    // J_k(t) = (1/(k-1)!) sum_j (-1)^j C(k-1,j) m_j t^{k-1-j}
    const int m = k - 1;
    double sum = 0.0;
    double binom = 1.0;  // C(m, j)
    double sign = 1.0;
    for (int j = 0; j <= m; ++j) {
        sum += sign * binom * table.moments[j] * std::pow(table.t, m - j);
        sign = -sign;
        binom *= static_cast<double>(m - j) / static_cast<double>(j + 1);
    }
    double fact = 1.0;
    for (int i = 2; i <= m; ++i) fact *= i;
    return sum / fact;
}

MomentTable moments_from_signal(const DenseSignal& signal, double t, int K) {
    if (K < 0) throw std::invalid_argument("moments_from_signal: K >= 0 required");
    const std::size_t last = signal.index_of(t);
    if (last < 2)
        throw std::invalid_argument(
            "moments_from_signal: need at least 3 grid points at or below t");

    MomentTable table;
    table.t = signal.grid()[last];
    table.moments.resize(K + 1);
    std::vector<double> integrand = signal.values();
    const auto& grid = signal.grid();
    for (int j = 0; j <= K; ++j) {
        if (j > 0)
            for (std::size_t i = 0; i <= last; ++i) integrand[i] *= grid[i];
        table.moments[j] = integrate_to(grid, integrand, last);
    }
    return table;
}

double iterated_quadrature_oracle(const DenseSignal& signal, int k, double t) {
    if (k < 1) throw std::invalid_argument("iterated_quadrature_oracle: k >= 1 required");
    const std::size_t idx = signal.index_of(t);
    if (idx == 0) return 0.0;
    if (idx < 2)
        throw std::invalid_argument(
            "iterated_quadrature_oracle: need at least 3 grid points at or below t");

    std::vector<double> y = signal.values();
    for (int pass = 0; pass < k; ++pass) y = cumulative(signal.grid(), y);
    return y[idx];
}

}  // namespace expsum
