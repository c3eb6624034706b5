#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace plg {

/// Base for failures that come from the numbers rather than from the caller.
/// The CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A variance that must be divided by fell below the 1e-12 floor.
class DegenerateVariance : public NumericalError {
public:
    explicit DegenerateVariance(const std::string& what,
                                std::optional<std::size_t> time_index = std::nullopt)
        : NumericalError(time_index ? what + " (t=" + std::to_string(*time_index) + ")" : what),
          time_index_(time_index) {}

    std::optional<std::size_t> time_index() const noexcept { return time_index_; }

private:
    std::optional<std::size_t> time_index_;
};

class SingularCovariance : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NoSolution : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NegativeSigma2 : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class AsymmetryDetected : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Caller error: mismatched dimensions, bad shapes, violated preconditions.
class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace plg
