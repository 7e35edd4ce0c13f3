#pragma once

#include <stdexcept>
#include <string>

namespace rlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Raised when a sampled domain cannot account for the mass outside it.
class DomainTooSmall : public Error {
 public:
  using Error::Error;
};

class NonDecayingKernel : public Error {
 public:
  using Error::Error;
};

class DegenerateWitness : public Error {
 public:
  using Error::Error;
};

/// Configuration error carrying the dotted path of the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace rlab
