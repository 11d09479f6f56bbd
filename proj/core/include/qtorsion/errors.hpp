#pragma once

#include <stdexcept>
#include <string>

namespace qtorsion {

/// Input that violates a documented precondition (wrong discriminant, bad config, ...).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Value outside the supported fixed-width integer range.
class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

/// Operation undefined for the given field or element (e.g. regulator of an imaginary field).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Exhaustive enumeration refused because the bound exceeds the configured ceiling.
class RefusalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A theorem hypothesis (e.g. pi_K^(1)(Z) > 0) does not hold for the requested data.
class HypothesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A structural constraint (cell count, partition shape) would be broken.
class ConstraintError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File system failure or stale / foreign cache data.
class IOError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Series evaluation could not reach the requested precision within its iteration cap.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double partial, double error_bound)
        : std::runtime_error(what), partial_(partial), error_bound_(error_bound) {}

    double partial_estimate() const noexcept { return partial_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double partial_;
    double error_bound_;
};

} // namespace qtorsion
