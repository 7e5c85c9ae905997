#pragma once

#include <stdexcept>
#include <string>

namespace polarnav {

/// Malformed or inconsistent input data (files, streams, configs).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Config/schema violation, carrying the offending line when known.
class SchemaError : public DataError {
 public:
  SchemaError(const std::string& what, int line)
      : DataError(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace polarnav
