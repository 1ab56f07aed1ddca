#pragma once

#include <stdexcept>
#include <string>

namespace fraclab {

/// Invalid grid, parameter or schedule supplied by the caller.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation (t <= 0, alpha >= n, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Non-finite values, failed factorizations and non-converging iterations.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition on the inputs of an algorithm does not hold.
class PreconditionError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

}  // namespace fraclab
