#pragma once

#include <stdexcept>
#include <string>

namespace rdmft {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied malformed input (bad orbital, wrong dimensions, unmet
/// precondition). The CLI maps these to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Input was well formed but the requested computation has no answer
/// (infeasible occupations, empty sector, capacity limits). Exit code 1.
class DomainError : public Error {
 public:
  using Error::Error;
};

class InvalidOrbitalError : public UsageError {
 public:
  using UsageError::UsageError;
};

class DimensionMismatchError : public UsageError {
 public:
  using UsageError::UsageError;
};

class PreconditionError : public UsageError {
 public:
  using UsageError::UsageError;
};

class StepTooLargeError : public UsageError {
 public:
  using UsageError::UsageError;
};

class InfeasibleError : public DomainError {
 public:
  using DomainError::DomainError;
};

class EmptySectorError : public DomainError {
 public:
  using DomainError::DomainError;
};

class CapacityError : public DomainError {
 public:
  using DomainError::DomainError;
};

class NotSimplexError : public DomainError {
 public:
  using DomainError::DomainError;
};

class NotDiagonalError : public DomainError {
 public:
  using DomainError::DomainError;
};

class UnsupportedError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Internal invariant violated (non-commuting symmetry operators,
/// non-Hermitian interaction, arithmetic overflow).
class ConsistencyError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace rdmft
