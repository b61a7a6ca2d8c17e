#pragma once

#include <stdexcept>
#include <string>

namespace hmrf {

// Invalid argument to a library call (out-of-range site, bad config, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Problem exceeds a hard size bound (exact enumeration).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Data cannot support the requested estimate (empty class, zero variance).
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed lattice or observation file.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace hmrf
