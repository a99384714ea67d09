#pragma once

#include <stdexcept>
#include <string>

namespace relclass {

// Raised on malformed input files (abstracts, relations, resources, models).
// line is 1-based; 0 means "no line information".
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg, std::size_t line = 0)
      : std::runtime_error(line ? msg + " at line " + std::to_string(line) : msg), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Raised on semantically invalid data: unknown entity ids, dimension
// mismatches, contract violations between components.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace relclass
