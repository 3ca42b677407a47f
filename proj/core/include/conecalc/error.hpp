#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace conecalc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the documented range.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Singular systems, spectrum collisions, non-convergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string message, std::vector<std::string> fields)
      : Error(std::move(message)), fields_(std::move(fields)) {}

  const std::vector<std::string>& fields() const { return fields_; }

 private:
  std::vector<std::string> fields_;
};

}  // namespace conecalc
