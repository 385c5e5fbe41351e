#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trajcc {

// Bad input data: malformed files, dangling references, violated preconditions.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// An incrementally maintained structure disagrees with its from-scratch recomputation.
class AuditError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace trajcc
