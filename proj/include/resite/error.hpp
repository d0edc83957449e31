#pragma once

#include <stdexcept>
#include <string>

namespace resite {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Violated precondition or inconsistent input data.
class InvalidInput : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

// The LP solver did not reach optimality; `status()` carries the verbatim status name.
class SolverError : public Error {
public:
  SolverError(std::string status, const std::string& what)
      : Error(what), status_(std::move(status)) {}

  const std::string& status() const noexcept { return status_; }

private:
  std::string status_;
};

}  // namespace resite
