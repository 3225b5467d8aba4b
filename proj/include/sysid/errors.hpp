#pragma once

#include <stdexcept>
#include <string>

namespace sysid {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: non-finite entries, dimension mismatches, bad configs.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// A Gram (or cross-Gram) matrix was singular or too ill-conditioned to invert.
class SingularGramError : public Error {
 public:
  SingularGramError(const std::string& msg, double condition_estimate)
      : Error(msg), condition(condition_estimate) {}
  double condition;
};

// Symmetric input had an eigenvalue below the PSD tolerance.
class NotPsdError : public Error {
 public:
  using Error::Error;
};

// Spectral radius >= 1; no geometric-decay certificate exists.
class UnstableError : public Error {
 public:
  using Error::Error;
};

// Operation does not apply to this system (e.g. controllability of an
// autonomous system).
class NotApplicableError : public Error {
 public:
  using Error::Error;
};

// The bias-compensation correction matrix was not invertible.
class CorrectionSingularError : public Error {
 public:
  CorrectionSingularError(const std::string& msg, double condition_estimate)
      : Error(msg), condition(condition_estimate) {}
  double condition;
};

// Horizon argument too small to form the shift equation.
class InvalidHorizonError : public Error {
 public:
  using Error::Error;
};

// A quantitative precondition failed; carries both sides of the comparison.
class PreconditionError : public Error {
 public:
  PreconditionError(const std::string& msg, double actual_value, double required_value)
      : Error(msg), actual(actual_value), required(required_value) {}
  double actual;
  double required;
};

// Plot requested from an empty summary.
class EmptyPlotError : public Error {
 public:
  using Error::Error;
};

// File read/write failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sysid
