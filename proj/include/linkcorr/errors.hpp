#pragma once

#include <stdexcept>
#include <string>

namespace linkcorr {

/// Operand shapes disagree (vector length vs matrix size, n vs n, ...).
class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Cholesky factorization failed, possibly after jitter repair.
class NotPositiveDefinite : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The observed block of a covariance could not be factored for conditioning.
class ConditioningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// G·Σ·Gᵀ is singular or too badly conditioned to project onto {x : G·x = r}.
class SingularConstraint : public std::runtime_error {
public:
    SingularConstraint(const std::string& what, double condition_estimate)
        : std::runtime_error(what), condition_estimate_(condition_estimate) {}
    double condition_estimate() const noexcept { return condition_estimate_; }

private:
    double condition_estimate_;
};

/// Route geometry and an alignment request (or event stream) disagree.
class InconsistentGeometry : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed file contents.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace linkcorr
