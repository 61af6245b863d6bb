#include "masklift/error.hpp"

namespace masklift {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidDepth: return "invalid-depth";
    case ErrorCode::kInvalidPose: return "invalid-pose";
    case ErrorCode::kMalformedFrame: return "malformed-frame";
    case ErrorCode::kMalformedInput: return "malformed-input";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kPrecondition: return "precondition-violation";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kInsufficientPoints: return "insufficient-points";
    case ErrorCode::kMalformedCorrespondence: return "malformed-correspondence";
    case ErrorCode::kLoad: return "load";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kAlignment: return "alignment";
    case ErrorCode::kValidation: return "validation";
  }
  return "unknown";
}

}  // namespace masklift
