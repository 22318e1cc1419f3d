#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bmdl {

/// A distribution or model parameter outside its support.
class ParameterError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or inconsistent input data (count matrices, manifests, labels).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text-format parse failure; carries the 1-based line and column.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
      : DataError(format(what, line, column)), detail_(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  /// Message without the position prefix.
  const std::string& detail() const noexcept { return detail_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    std::string msg = "line " + std::to_string(line);
    if (column > 0) msg += ", column " + std::to_string(column);
    return msg + ": " + what;
  }

  std::string detail_;
  std::size_t line_;
  std::size_t column_;
};

/// Checkpoint that cannot be resumed against the supplied data or build.
class CheckpointError : public DataError {
 public:
  using DataError::DataError;
};

/// The sampler produced a non-finite or otherwise unusable quantity.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bmdl
