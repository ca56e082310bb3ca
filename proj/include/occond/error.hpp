#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace occond {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented invariant. `path` points into the offending
/// document (e.g. "humans[0].beta") when the input came from a file.
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Mismatched array lengths or image sizes.
class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
  explicit DimensionError(const std::string& message) : ValidationError("", message) {}
};

/// Filesystem or codec failure; `path` is the file involved.
class IoError : public Error {
 public:
  IoError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace occond
