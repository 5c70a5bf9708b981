#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vipscene {

enum class ErrorCode {
  // geometry
  DegenerateInput,
  NonConvexInput,
  // tensor / manifest / catalog input
  MissingFile,
  BadMagic,
  TruncatedPayload,
  PayloadSizeMismatch,
  UnsupportedDtype,
  ShapeMismatch,
  DanglingTrackRef,
  InvalidManifest,
  InvalidCatalog,
  InvalidDocument,
  // pipeline stages
  NoValidPixels,
  NonPositiveScale,
  UnknownObject,
  EmptyAfterErosion,
  NoCategoryMatch,
  NoCandidates,
  // evaluation
  ParseFailure,
  MissingMarker,
  LengthMismatch,
  TransportError,
  // configuration / tooling
  InvalidConfig,
  UnknownKind,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a stable error code. All library failures surface as this type.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::DegenerateInput: return "DegenerateInput";
  case ErrorCode::NonConvexInput: return "NonConvexInput";
  case ErrorCode::MissingFile: return "MissingFile";
  case ErrorCode::BadMagic: return "BadMagic";
  case ErrorCode::TruncatedPayload: return "TruncatedPayload";
  case ErrorCode::PayloadSizeMismatch: return "PayloadSizeMismatch";
  case ErrorCode::UnsupportedDtype: return "UnsupportedDtype";
  case ErrorCode::ShapeMismatch: return "ShapeMismatch";
  case ErrorCode::DanglingTrackRef: return "DanglingTrackRef";
  case ErrorCode::InvalidManifest: return "InvalidManifest";
  case ErrorCode::InvalidCatalog: return "InvalidCatalog";
  case ErrorCode::InvalidDocument: return "InvalidDocument";
  case ErrorCode::NoValidPixels: return "NoValidPixels";
  case ErrorCode::NonPositiveScale: return "NonPositiveScale";
  case ErrorCode::UnknownObject: return "UnknownObject";
  case ErrorCode::EmptyAfterErosion: return "EmptyAfterErosion";
  case ErrorCode::NoCategoryMatch: return "NoCategoryMatch";
  case ErrorCode::NoCandidates: return "NoCandidates";
  case ErrorCode::ParseFailure: return "ParseFailure";
  case ErrorCode::MissingMarker: return "MissingMarker";
  case ErrorCode::LengthMismatch: return "LengthMismatch";
  case ErrorCode::TransportError: return "TransportError";
  case ErrorCode::InvalidConfig: return "InvalidConfig";
  case ErrorCode::UnknownKind: return "UnknownKind";
  }
  return "Unknown";
}

} // namespace vipscene
