#include "smpi/error.hpp"

namespace smpi {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidCamera: return "InvalidCamera";
    case ErrorCode::kZeroNormal: return "ZeroNormal";
    case ErrorCode::kNonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::kDegeneratePlane: return "DegeneratePlane";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonMonotoneDepths: return "NonMonotoneDepths";
    case ErrorCode::kDegenerate: return "Degenerate";
    case ErrorCode::kEmptyScene: return "EmptyScene";
    case ErrorCode::kUnknownScene: return "UnknownScene";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kImageTooSmall: return "ImageTooSmall";
    case ErrorCode::kNoOverlap: return "NoOverlap";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kCorruptManifest: return "CorruptManifest";
    case ErrorCode::kMissingLayer: return "MissingLayer";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": " + message),
      line_(line) {}

MissingLayerError::MissingLayerError(std::size_t proxy_index, const std::string& path)
    : Error(ErrorCode::kMissingLayer,
            "proxy " + std::to_string(proxy_index) + " layer not found: " + path),
      proxy_index_(proxy_index) {}

}  // namespace smpi
