#pragma once

#include <stdexcept>
#include <string>

namespace invreg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that do not conform (unvec length, N mismatch, profile length...).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Arguments outside an operation's domain (probabilities, counts, flags).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A matrix that had to be factored or inverted was not. Carries the name of
// the offending matrix so callers can report which input was at fault.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(std::string matrix, const std::string& what)
      : Error(what), matrix_(std::move(matrix)) {}
  const std::string& matrix_name() const noexcept { return matrix_; }

 private:
  std::string matrix_;
};

// Cholesky failed on an input that is required to be SPD.
class NotSpdError : public SingularMatrixError {
 public:
  using SingularMatrixError::SingularMatrixError;
};

// YᵀY singular: responses are collinear (or a response column is constant).
class CollinearResponseError : public SingularMatrixError {
 public:
  using SingularMatrixError::SingularMatrixError;
};

class InsufficientSampleError : public Error {
 public:
  using Error::Error;
};

// The least-squares baseline asked for a design it cannot handle (N <= D).
class UnsupportedDesignError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace invreg
