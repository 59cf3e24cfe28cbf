#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace revlab {

/// A precondition or invariant of an operation was violated by its inputs.
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A named entity (boundary configuration, payload, suite) does not exist.
class LookupError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// The integrator produced a non-finite state.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(std::size_t step, const std::string& what)
        : std::runtime_error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class SamplingError : public std::runtime_error {
public:
    enum class Kind { shell_unreachable, empty_restriction, insufficient_exchange };

    SamplingError(Kind kind, const std::string& what, std::size_t crossings = 0)
        : std::runtime_error(what), kind_(kind), crossings_(crossings) {}
    Kind kind() const noexcept { return kind_; }
    /// Inter-region crossings observed; meaningful for insufficient_exchange.
    std::size_t crossings() const noexcept { return crossings_; }

private:
    Kind kind_;
    std::size_t crossings_;
};

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(double lo, double hi, double error_estimate, const std::string& what)
        : std::runtime_error(what), lo_(lo), hi_(hi), error_(error_estimate) {}
    double lower() const noexcept { return lo_; }
    double upper() const noexcept { return hi_; }
    double error_estimate() const noexcept { return error_; }

private:
    double lo_;
    double hi_;
    double error_;
};

/// An estimator had nothing to estimate from (e.g. every trajectory was excluded).
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A supplied reverse-probability estimate undercuts the true value it claims to bound.
class OverestimateViolation : public ContractViolation {
public:
    using ContractViolation::ContractViolation;
};

}  // namespace revlab
