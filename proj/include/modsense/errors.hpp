#pragma once

#include <stdexcept>
#include <string>

namespace modsense {

// Raised for malformed model descriptions or out-of-range arguments.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a linear-algebra kernel or a limit procedure fails to deliver a
// finite, trustworthy number.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A spectral gap closed where the requested quantity needs it open.
class GapClosedError : public NumericalError {
 public:
  GapClosedError(const std::string& what, double location)
      : NumericalError(what), location_(location) {}
  double location() const { return location_; }

 private:
  double location_;
};

// Reading or writing a file failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace modsense
