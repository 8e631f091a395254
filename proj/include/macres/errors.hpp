#pragma once

#include <stdexcept>
#include <string>

namespace macres {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input documents or values that violate a type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Arguments outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Enumeration or sampling would exceed the configured work limits.
class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace macres
