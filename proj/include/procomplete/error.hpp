#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace procomplete {

enum class ErrorCode {
  MalformedXml,
  NoProcessFound,
  DanglingFlow,
  UnknownNode,
  ProviderUnavailable,
  DimensionMismatch,
  EmptyIndex,
  NoSliceEndsAtTarget,
  ModeMismatch,
  DescriptorMismatch,
  IoFailure,
  FormatVersionMismatch,
  ChecksumMismatch,
  InsufficientCorpus,
  EmptyPool,
  TargetUnreachable,
  InvalidArgument,
};

/// Stable snake_case name, used in CLI output and HTTP error bodies.
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace procomplete
