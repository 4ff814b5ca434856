#include "procomplete/error.hpp"

namespace procomplete {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedXml: return "malformed_xml";
    case ErrorCode::NoProcessFound: return "no_process_found";
    case ErrorCode::DanglingFlow: return "dangling_flow";
    case ErrorCode::UnknownNode: return "unknown_node";
    case ErrorCode::ProviderUnavailable: return "provider_unavailable";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::EmptyIndex: return "empty_index";
    case ErrorCode::NoSliceEndsAtTarget: return "no_slices";
    case ErrorCode::ModeMismatch: return "mode_mismatch";
    case ErrorCode::DescriptorMismatch: return "descriptor_mismatch";
    case ErrorCode::IoFailure: return "io_failure";
    case ErrorCode::FormatVersionMismatch: return "format_version_mismatch";
    case ErrorCode::ChecksumMismatch: return "checksum_mismatch";
    case ErrorCode::InsufficientCorpus: return "insufficient_corpus";
    case ErrorCode::EmptyPool: return "empty_pool";
    case ErrorCode::TargetUnreachable: return "target_unreachable";
    case ErrorCode::InvalidArgument: return "invalid_argument";
  }
  return "unknown";
}

}  // namespace procomplete
