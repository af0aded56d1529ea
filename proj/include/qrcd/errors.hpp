#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qrcd {

// Malformed input: bad JSON, missing fields, broken run-file invariants.
// line is 1-based; 0 means the error is not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error(line == 0 ? message
                                     : "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A caller handed an operation inputs that break its contract
// (invalid Run passed to write_run, unknown pq_id in strict evaluation, ...).
class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qrcd
