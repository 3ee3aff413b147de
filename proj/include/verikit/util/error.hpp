#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace verikit {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: wrong dimensions, bad file contents, violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A file failed format validation at a known byte offset.
class FormatError : public ValidationError {
 public:
  FormatError(std::string path, std::uint64_t offset, const std::string& what)
      : ValidationError(path + ": " + what + " at byte offset " + std::to_string(offset)),
        path_(std::move(path)),
        offset_(offset) {}

  const std::string& path() const noexcept { return path_; }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::string path_;
  std::uint64_t offset_;
};

/// The premises of the no-false-positive check did not hold on a dataset.
class InvalidPremises : public Error {
 public:
  using Error::Error;
};

}  // namespace verikit
