#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace expsum {

/// Collocation or coefficient matrix is numerically rank-deficient.
class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Root iteration exhausted its budget or a root failed the residual contract.
class NonConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two recovered rate constants coincide within the duplicate threshold.
class DuplicateRatesError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shift value leaves a negative sample value; carries nothing extra.
class ShiftTooSmallError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fewer sample records than the selected mode requires.
class InsufficientRecordsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file (CSV or JSON); message names the offending line.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rate extraction produced roots with imaginary parts too large to project.
/// Carries the offending root set for diagnostics.
class ComplexRatesError : public std::runtime_error {
public:
    ComplexRatesError(const std::string& msg, std::vector<std::complex<double>> roots)
        : std::runtime_error(msg), roots_(std::move(roots)) {}

    const std::vector<std::complex<double>>& roots() const noexcept { return roots_; }

private:
    std::vector<std::complex<double>> roots_;
};

}  // namespace expsum
