#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace masklift {

enum class ErrorCode {
  kInvalidDepth,
  kInvalidPose,
  kMalformedFrame,
  kMalformedInput,
  kConfig,
  kPrecondition,
  kEmptyInput,
  kInsufficientPoints,
  kMalformedCorrespondence,
  kLoad,
  kIo,
  kParse,
  kAlignment,
  kValidation,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception type for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace masklift
