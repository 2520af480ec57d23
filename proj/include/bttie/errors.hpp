#pragma once

#include <stdexcept>
#include <string>

namespace bttie {

// Base of every error raised by the library. The service maps the concrete
// subclasses onto HTTP status codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

// i == j, or an index outside the ward table.
class InvalidPair : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

class DimensionMismatch : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

// Cholesky (or other factorisation) of a matrix expected to be PD failed.
class NotPositiveDefinite : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

class NotFound : public Error {
public:
  using Error::Error;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

class Conflict : public Error {
public:
  using Error::Error;
};

class NoPairAvailable : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Wraps a failure inside a sampler loop with the iteration it happened at.
class SamplerFailure : public Error {
public:
  SamplerFailure(long iteration, const std::string& what)
      : Error("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}
  long iteration() const noexcept { return iteration_; }

private:
  long iteration_;
};

} // namespace bttie
