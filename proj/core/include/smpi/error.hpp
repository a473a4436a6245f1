#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace smpi {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidCamera,
  kZeroNormal,
  kNonPositiveDepth,
  kDegeneratePlane,
  kDimensionMismatch,
  kNonMonotoneDepths,
  kDegenerate,
  kEmptyScene,
  kUnknownScene,
  kEmptyInput,
  kEmptyMask,
  kImageTooSmall,
  kNoOverlap,
  kVersionMismatch,
  kCorruptManifest,
  kMissingLayer,
  kUnsupportedFormat,
  kParseError,
  kIo,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code is stable
/// and meant for programmatic handling; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by text parsers. Line numbers are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MissingLayerError : public Error {
 public:
  MissingLayerError(std::size_t proxy_index, const std::string& path);

  [[nodiscard]] std::size_t proxy_index() const noexcept { return proxy_index_; }

 private:
  std::size_t proxy_index_;
};

}  // namespace smpi
