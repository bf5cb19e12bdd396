#pragma once

#include <stdexcept>
#include <string>

namespace gyrad {

// Error taxonomy shared by the library and the CLI exit-code mapping:
// invalid_parameter -> 2, resource_limit -> 3, numeric_failure -> 4.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class invalid_parameter : public error {
 public:
  using error::error;
};

// Requested truncation radius leaves too much mass outside the box.
class truncation_error : public invalid_parameter {
 public:
  truncation_error(const std::string& msg, double bound)
      : invalid_parameter(msg), bound_(bound) {}
  double bound() const { return bound_; }

 private:
  double bound_;
};

class resource_limit : public error {
 public:
  using error::error;
};

class numeric_failure : public error {
 public:
  using error::error;
};

// A query on a field with no mass (e.g. gyration radius of the zero field).
class degenerate_field : public numeric_failure {
 public:
  using numeric_failure::numeric_failure;
};

}  // namespace gyrad
