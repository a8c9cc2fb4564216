#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "expsum/calculus.hpp"
#include "expsum/model.hpp"
#include "expsum/solver.hpp"

namespace expsum {

/// One observation: f(t) together with its iterated integrals J_1..J_K at t.
struct SampleRecord {
    double t = 0.0;
    double f_value = 0.0;
    std::vector<double> integrals;
};

enum class RecoveryMode { strict, shifted, with_constant };

const char* to_string(RecoveryMode mode);

/// Knobs with documented defaults; every one has a CLI override.
struct RecoveryTolerances {
    double root_residual = 1e-8;    // poly_roots acceptance, scaled by 1+|r|^N
    double imag_tol = 1e-8;         // |Im| <= imag_tol*(1+|Re|) projects to real
    double duplicate_gap = 1e-8;    // closer rates violate the distinctness hypothesis
    double cond_warn = 1e10;        // condition estimate above this warns
    double spurious_factor = 1e-7;  // tau_zero = spurious_factor * max|c|
};

struct RecoveryProblem {
    /// Number of terms to recover. In with_constant mode this counts ALL
    /// terms including the constant; in shifted mode it counts the
    /// exponential terms of the unshifted signal.
    int n_terms = 1;
    std::vector<SampleRecord> records;  // sorted by t, pairwise distinct
    RecoveryMode mode = RecoveryMode::strict;
    std::optional<double> shift_value;  // shifted mode only
    /// Greedy pivot-based row selection when more records than rows are
    /// available (default: first rows win).
    bool reselect_rows = false;
    RecoveryTolerances tol;
};

struct RecoveryResult {
    ExpSumModel model;
    std::vector<double> x_vector;
    MonicPolynomial frobenius;
    double cond_estimate = 0.0;
    double collocation_residual = 0.0;
    double reconstruction_residual = 0.0;  // max over records |f_model(t_i) - f_i|
    RecoveryMode mode_used = RecoveryMode::strict;
    std::vector<std::string> warnings;
};

struct CollocationSystem {
    DenseMatrix matrix;
    std::vector<double> rhs;
};

/// Build the square collocation system for the problem's mode. Row layout:
/// [J_1(t) ... J_K(t), 1, t, ..., t^{P-1}] with rhs f(t), where
/// strict uses K = P = N (2N rows), with_constant K = N-1, P = N (2N-1 rows),
/// and shifted assembles the transformed (N+1)-term with_constant system.
/// Also returns the indices of the records used as rows.
std::pair<CollocationSystem, std::vector<int>> assemble_system(const RecoveryProblem& problem);

/// Full recovery pipeline at declared size N: solve for x, take the rate
/// constants as the real roots of the companion polynomial, then fit
/// coefficients over all records.
RecoveryResult recover(const RecoveryProblem& problem);

/// Zero-rate variant: one term is a constant (rate 0), leaving N-1
/// exponential terms and a (2N-1)-square system.
RecoveryResult recover_with_constant(const RecoveryProblem& problem);

/// Sign-indefinite variant: add shift s to f (and s t^k/k! to J_k), recover
/// with an artificial constant term, then subtract s from the recovered
/// constant.
RecoveryResult recover_shifted(const RecoveryProblem& problem);

/// Dispatch on problem.mode.
RecoveryResult run(const RecoveryProblem& problem);

struct VerifyTerm {
    double coeff = 0.0;
    double rate = 0.0;
    bool significant = false;
};

struct VerifyReport {
    bool pass = false;
    int n_significant = 0;
    double tau_zero = 0.0;  // significance threshold actually used
    std::vector<VerifyTerm> terms;        // declared-size recovery, rate ascending
    std::vector<ExpSumTerm> reference;    // independent true-size recovery
    double max_relative_deviation = 0.0;  // significant terms vs reference
    std::vector<std::string> notes;
};

/// Overdetermined consistency check: recover with problem.n_terms = r >= true
/// order declared and records >= 2r, then confirm that exactly `true_n`
/// coefficients are significant and match an independent size-true_n
/// recovery. The oversized square system is exactly rank-deficient, so this
/// path solves in the minimum-norm least-squares sense over all records and
/// tolerates complex spurious rates (their coefficients must still vanish).
VerifyReport verify_overdetermined(const RecoveryProblem& problem, int true_n);

/// Records with closed-form values and integrals from a known model.
std::vector<SampleRecord> exact_records(const ExpSumModel& model, const std::vector<double>& times,
                                        int n_integrals);

/// Records built from a dense signal by quadrature (moments, then the
/// binomial identity). Each requested time must be a grid point.
std::vector<SampleRecord> ingest_records(const DenseSignal& signal,
                                         const std::vector<double>& times, int n_integrals);

}  // namespace expsum
