#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace locec {

/// Malformed or inconsistent input data. Carries the offending file and line
/// when the error originates from a parser.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
  DataError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
        path_(path),
        line_(line) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_ = 0;
};

/// Tensor or model dimensions that do not agree with the data they are
/// applied to.
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace locec
