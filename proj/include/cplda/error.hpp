#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cplda {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes or mode indices that do not fit together.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A precondition on an argument value was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Matrix is (numerically) rank deficient.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Cholesky breakdown; `pivot()` is the 0-based column where it failed.
class DefinitenessError : public Error {
public:
    DefinitenessError(const std::string& what, std::size_t pivot)
        : Error(what), pivot_(pivot) {}
    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Covariance normalization is impossible (degenerate first entry).
class NormalizationError : public Error {
public:
    using Error::Error;
};

/// Model parameters are mutually inconsistent (e.g. negative <B, D>).
class ModelInconsistencyError : public Error {
public:
    using Error::Error;
};

/// A projection annihilated CP component (r, m).
class DegenerateComponentError : public Error {
public:
    DegenerateComponentError(const std::string& what, std::size_t component, std::size_t mode)
        : Error(what), component_(component), mode_(mode) {}
    std::size_t component() const noexcept { return component_; }
    std::size_t mode() const noexcept { return mode_; }

private:
    std::size_t component_;
    std::size_t mode_;
};

/// Randomized projection ran out of candidate tuples after pruning.
class PoolExhaustedError : public Error {
public:
    using Error::Error;
};

/// File-format or filesystem failure.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace cplda
