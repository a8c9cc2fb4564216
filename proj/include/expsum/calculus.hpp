#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace expsum {

/// Dense samples of a scalar signal on a strictly increasing grid that
/// starts at 0. Immutable after construction.
class DenseSignal {
  public:
    DenseSignal(std::vector<double> grid, std::vector<double> values);

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return grid_.size(); }
    double t_max() const { return grid_.back(); }

    /// Index of the grid point equal to t (tiny tolerance for parse rounding);
    /// throws std::invalid_argument if t is not on the grid.
    std::size_t index_of(double t) const;

    /// Sample f on a uniform grid over [0, t_max] with n_points points.
    template <typename F>
    static DenseSignal tabulate(F&& f, double t_max, int n_points) {
        std::vector<double> grid(n_points), values(n_points);
        for (int i = 0; i < n_points; ++i) {
            grid[i] = t_max * static_cast<double>(i) / static_cast<double>(n_points - 1);
            values[i] = f(grid[i]);
        }
        grid[0] = 0.0;
        return DenseSignal(std::move(grid), std::move(values));
    }

  private:
    std::vector<double> grid_;
    std::vector<double> values_;
};

/// Moments m_0..m_K of a signal over [0, t]: m_j = integral of t'^j f(t').
struct MomentTable {
    double t = 0.0;
    std::vector<double> moments;
};

/// k-fold iterated integral from the moment table via the binomial identity
///   J_k(t) = (1/(k-1)!) sum_{j=0}^{k-1} (-1)^j C(k-1,j) m_j(t) t^{k-1-j}.
/// Requires moments m_0..m_{k-1} to be present.
double integrals_from_moments(const MomentTable& table, int k);

/// Moments m_0..m_K over [0, t] by composite Simpson quadrature on the grid
/// (trapezoid on nonuniform triples and on a trailing odd panel).
/// t must be a grid point with at least two panels below it.
MomentTable moments_from_signal(const DenseSignal& signal, double t, int K);

/// k-fold iterated integral at t by k cumulative quadrature passes.
/// Slower than the moment route; serves as an independent cross-check.
double iterated_quadrature_oracle(const DenseSignal& signal, int k, double t);

}  // namespace expsum
