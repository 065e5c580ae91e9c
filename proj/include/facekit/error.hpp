#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace facekit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input bytes. Carries the byte offset where decoding stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A precondition on arguments was violated (bad dimension, empty input, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A model or dataset could not be built or read.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace facekit
