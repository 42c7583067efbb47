#pragma once

#include <stdexcept>
#include <string>

namespace optosync {

/// Bad user input: malformed config, violated parameter invariant, bad CLI value.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Anything that goes wrong while computing: divergence, singular solves,
/// failed tolerances.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, double time)
        : NumericalError(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class SingularSystemError : public NumericalError {
public:
    SingularSystemError(const std::string& what, double condition)
        : NumericalError(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

class InstabilityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ToleranceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Precondition of an analytic derivation does not hold for the given parameters.
class PreconditionError : public InputError {
public:
    using InputError::InputError;
};

}  // namespace optosync
