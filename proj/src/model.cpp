#include "expsum/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace expsum {

namespace {

// 53-bit uniform in [0,1) with a fixed engine-to-double mapping, so seeded
// runs reproduce bit-for-bit across standard libraries.
double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

double uniform_in(std::mt19937_64& eng, double lo, double hi) {
    return lo + uniform01(eng) * (hi - lo);
}

}  // namespace

ExpSumModel::ExpSumModel(std::vector<ExpSumTerm> terms, std::optional<double> constant)
    : terms_(std::move(terms)), constant_(constant) {
    if (terms_.empty())
        throw std::invalid_argument("ExpSumModel: at least one exponential term required");
    for (const auto& term : terms_) {
        if (!std::isfinite(term.coeff) || !std::isfinite(term.rate))
            throw std::invalid_argument("ExpSumModel: non-finite term parameter");
        if (term.rate == 0.0)
            throw std::invalid_argument(
                "ExpSumModel: zero rate must be carried by the constant field");
    }
    for (std::size_t i = 0; i < terms_.size(); ++i)
        for (std::size_t j = i + 1; j < terms_.size(); ++j)
            if (terms_[i].rate == terms_[j].rate)
                throw std::invalid_argument("ExpSumModel: rates must be pairwise distinct");
    if (constant_ && !std::isfinite(*constant_))
        throw std::invalid_argument("ExpSumModel: non-finite constant");
}

double checked_exp(double x) {
    if (std::abs(x) > 700.0)
        throw std::range_error("exp argument " + std::to_string(x) +
                               " exceeds the representable exponent range (|x| <= 700)");
    return std::exp(x);
}

double evaluate(const ExpSumModel& model, double t) {
    if (!std::isfinite(t)) throw std::invalid_argument("evaluate: t must be finite");
    double sum = model.constant().value_or(0.0);
    for (const auto& term : model.terms()) sum += term.coeff * checked_exp(term.rate * t);
    return sum;
}

// The naive subtraction e^z - head cancels catastrophically for small |z|
// (the head nearly equals e^z), so below |z| = 2 the tail series is summed
// directly; its successive term ratio is z/(k+j), so no cancellation.
double exp_taylor_remainder(int k, double z) {
    if (k < 0) throw std::invalid_argument("exp_taylor_remainder: k >= 0 required");
    if (std::abs(z) > 2.0) {
        double value = checked_exp(z);
        double term = 1.0;  // z^j / j!
        for (int j = 0; j < k; ++j) {
            value -= term;
            term *= z / static_cast<double>(j + 1);
        }
        return value;
    }
    double term = 1.0;  // z^k / k! after the loop
    for (int j = 1; j <= k; ++j) term *= z / static_cast<double>(j);
    double sum = 0.0;
    for (int j = 0; j < 60; ++j) {
        double prev = sum;
        sum += term;
        if (sum == prev) break;
        term *= z / static_cast<double>(k + j + 1);
    }
    return sum;
}

double iterated_integral_exact(const ExpSumModel& model, int k, double t) {
    if (k < 1)
        throw std::invalid_argument("iterated_integral_exact: k >= 1 required (k = 0 is f itself)");
    if (t < 0.0) throw std::invalid_argument("iterated_integral_exact: t >= 0 required");

    double sum = 0.0;
    for (const auto& term : model.terms()) {
        // One term integrates to (c/a^k) * (e^{at} - Taylor head of degree k-1).
        const double a = term.rate;
        double inv_ak = 1.0;
        for (int i = 0; i < k; ++i) inv_ak /= a;
        sum += term.coeff * inv_ak * exp_taylor_remainder(k, a * t);
    }
    if (model.constant()) {
        double tk = 1.0;
        for (int j = 1; j <= k; ++j) tk *= t / static_cast<double>(j);
        sum += *model.constant() * tk;  // c0 t^k / k!
    }
    return sum;
}

double moment_exact(const ExpSumModel& model, int k, double t) {
    if (k < 0) throw std::invalid_argument("moment_exact: k >= 0 required");
    if (t < 0.0) throw std::invalid_argument("moment_exact: t >= 0 required");

    double sum = 0.0;
    for (const auto& term : model.terms()) {
        const double a = term.rate;
        const double eat = checked_exp(a * t);
        // mu_0 = (e^{at} - 1)/a, then mu_j = t^j e^{at}/a - (j/a) mu_{j-1};
        // expm1 keeps mu_0 accurate when |at| is small
        double mu = std::expm1(a * t) / a;
        double tj = 1.0;
        for (int j = 1; j <= k; ++j) {
            tj *= t;
            mu = tj * eat / a - static_cast<double>(j) / a * mu;
        }
        sum += term.coeff * mu;
    }
    if (model.constant()) {
        double tk1 = t;
        for (int j = 0; j < k; ++j) tk1 *= t;
        sum += *model.constant() * tk1 / static_cast<double>(k + 1);
    }
    return sum;
}

double grid_min(const ExpSumModel& model, double t_max, int n_points) {
    if (n_points < 2) throw std::invalid_argument("grid_min: n_points >= 2 required");
    double lo = evaluate(model, 0.0);
    for (int i = 1; i < n_points; ++i) {
        const double t = t_max * static_cast<double>(i) / static_cast<double>(n_points - 1);
        lo = std::min(lo, evaluate(model, t));
    }
    return lo;
}

GeneratedModel generate(const GeneratorSpec& spec) {
    if (spec.n_terms < 1) throw std::invalid_argument("generate: n_terms >= 1 required");
    if (spec.min_rate_separation <= 0.0 || spec.zero_ball <= 0.0 || spec.horizon <= 0.0)
        throw std::invalid_argument("generate: separation, zero ball and horizon must be positive");
    if (!(spec.rate_max > spec.rate_min))
        throw std::invalid_argument("generate: empty rate range");
    if (spec.rate_max <= spec.zero_ball && spec.rate_min >= -spec.zero_ball)
        throw std::invalid_argument("generate: rate range lies inside the zero ball");

    std::mt19937_64 eng(spec.seed);
    constexpr int kMaxModelAttempts = 200;
    constexpr int kMaxRateDraws = 2000;

    std::vector<ExpSumTerm> last_terms;
    for (int attempt = 1; attempt <= kMaxModelAttempts; ++attempt) {
        std::vector<double> rates;
        rates.reserve(spec.n_terms);
        int draws = 0;
        while (static_cast<int>(rates.size()) < spec.n_terms) {
            if (++draws > kMaxRateDraws)
                throw std::runtime_error(
                    "generate: could not draw " + std::to_string(spec.n_terms) +
                    " rates with separation >= " + std::to_string(spec.min_rate_separation) +
                    " outside the zero ball after " + std::to_string(kMaxRateDraws) +
                    " draws; widen the rate range or relax the separation");
            const double r = uniform_in(eng, spec.rate_min, spec.rate_max);
            if (std::abs(r) < spec.zero_ball) continue;
            bool ok = true;
            for (double prev : rates)
                if (std::abs(r - prev) < spec.min_rate_separation) { ok = false; break; }
            if (ok) rates.push_back(r);
        }

        std::vector<ExpSumTerm> terms(spec.n_terms);
        for (int i = 0; i < spec.n_terms; ++i) {
            terms[i].rate = rates[i];
            terms[i].coeff = uniform_in(eng, spec.coeff_min, spec.coeff_max);
        }
        std::sort(terms.begin(), terms.end(),
                  [](const ExpSumTerm& a, const ExpSumTerm& b) { return a.rate < b.rate; });

        if (!spec.nonneg_required)
            return GeneratedModel{ExpSumModel(std::move(terms)), 0.0, attempt};

        ExpSumModel candidate(terms);
        if (grid_min(candidate, spec.horizon) >= 0.0)
            return GeneratedModel{std::move(candidate), 0.0, attempt};
        last_terms = std::move(terms);
    }

    // Resampling budget exhausted: shift the last candidate up to nonnegative
    // and report the shift.
    ExpSumModel base(last_terms);
    const double shift = -grid_min(base, spec.horizon);
    ExpSumModel shifted(std::move(last_terms), shift);
    return GeneratedModel{std::move(shifted), shift, kMaxModelAttempts};
}

}  // namespace expsum
