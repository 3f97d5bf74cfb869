#pragma once

#include <stdexcept>
#include <string>

namespace dcvae {

/// Operand shapes are incompatible.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input lies outside the domain of an operation (log of a non-positive
/// value, non-finite objective).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A precondition on the call itself was violated (non-scalar loss,
/// batch too small for train-mode normalization, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// User configuration cannot be satisfied or is malformed.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Training produced a non-finite value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dcvae
