#pragma once

#include <stdexcept>
#include <string>

namespace ilsbm {

// Base for every error raised by the library. Callers that only care about
// "the input was bad" can catch this; finer types below carry context.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or invalid loan-record input. `row` is the 1-based line number in
// the source (the CSV header is line 1), or the 1-based record position when
// records did not come from a file.
class IngestError : public Error {
 public:
  IngestError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace ilsbm
