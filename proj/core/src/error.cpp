#include "trajprune/error.hpp"

namespace trajprune {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MagicMismatch: return "MagicMismatch";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DuplicateSampleId: return "DuplicateSampleId";
    case ErrorCode::EpochGap: return "EpochGap";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::SelectorOutOfRange: return "SelectorOutOfRange";
    case ErrorCode::MaxOverEmptySet: return "MaxOverEmptySet";
    case ErrorCode::EpochOutOfRange: return "EpochOutOfRange";
    case ErrorCode::MetricMismatch: return "MetricMismatch";
    case ErrorCode::MetricSelectorMismatch: return "MetricSelectorMismatch";
    case ErrorCode::SampleSetMismatch: return "SampleSetMismatch";
    case ErrorCode::MissingSoftLabels: return "MissingSoftLabels";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::RateOutOfRange: return "RateOutOfRange";
    case ErrorCode::UnknownSampleId: return "UnknownSampleId";
    case ErrorCode::RatioOutOfRange: return "RatioOutOfRange";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace trajprune
