#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace expsum {

struct ExpSumTerm {
    double coeff = 0.0;
    double rate = 0.0;  // nonzero; a zero rate lives in ExpSumModel::constant
};

/// f(t) = constant + sum_n coeff_n * exp(rate_n * t).
///
/// Rates are pairwise distinct and nonzero; immutable after construction.
class ExpSumModel {
public:
    explicit ExpSumModel(std::vector<ExpSumTerm> terms,
                         std::optional<double> constant = std::nullopt);

    const std::vector<ExpSumTerm>& terms() const noexcept { return terms_; }
    const std::optional<double>& constant() const noexcept { return constant_; }
    int n_terms() const noexcept { return static_cast<int>(terms_.size()); }

private:
    std::vector<ExpSumTerm> terms_;
    std::optional<double> constant_;
};

/// exp(x) guarded against the double exponent range; |x| > 700 raises
/// std::range_error instead of silently over/underflowing.
double checked_exp(double x);

/// e^z minus its Taylor polynomial of degree k-1, i.e. sum_{j>=k} z^j/j!,
/// k >= 0. Uses the tail series for small |z|, where the direct subtraction
/// would cancel catastrophically.
double exp_taylor_remainder(int k, double z);

double evaluate(const ExpSumModel& model, double t);

/// k-fold cumulative integral J_k(t) of the model from 0, in closed form.
/// J_1 is the plain integral; k >= 1.
double iterated_integral_exact(const ExpSumModel& model, int k, double t);

/// k-th moment m_k(t) = integral of t'^k f(t') over [0, t], k >= 0,
/// via the per-term integration-by-parts recurrence.
double moment_exact(const ExpSumModel& model, int k, double t);

/// Minimum of f over a uniform n_points grid on [0, t_max].
double grid_min(const ExpSumModel& model, double t_max, int n_points = 10000);

struct GeneratorSpec {
    int n_terms = 1;
    double rate_min = -2.0;
    double rate_max = 2.0;
    double zero_ball = 0.05;           // |rate| >= zero_ball
    double min_rate_separation = 0.1;  // pairwise |rate_i - rate_j|
    double coeff_min = 0.1;
    double coeff_max = 5.0;
    bool nonneg_required = false;      // f >= 0 on [0, horizon], checked on a dense grid
    double horizon = 3.0;
    std::uint64_t seed = 0;
};

struct GeneratedModel {
    ExpSumModel model;
    double nonneg_shift = 0.0;  // constant added to reach f >= 0, 0 when none was needed
    int attempts = 1;
};

/// Deterministic per seed. Rates are resampled until they respect the zero
/// ball and the pairwise separation; under nonneg_required the whole model is
/// resampled a bounded number of times, then shifted by a constant as a last
/// resort (the shift is reported).
GeneratedModel generate(const GeneratorSpec& spec);

}  // namespace expsum
