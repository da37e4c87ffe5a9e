#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kdelinalg {

// Bad argument: wrong dimension, out-of-range parameter, negative input.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Problem too large for a brute-force oracle.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Malformed point file. line() is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace kdelinalg
