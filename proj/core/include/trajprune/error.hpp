#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trajprune {

enum class ErrorCode {
  // trajectory store
  MagicMismatch,
  TruncatedFile,
  NonFinite,
  DuplicateSampleId,
  EpochGap,
  FormatError,
  IoFailure,
  // metrics
  SelectorOutOfRange,
  MaxOverEmptySet,
  EpochOutOfRange,
  MetricMismatch,
  MetricSelectorMismatch,
  SampleSetMismatch,
  // purify / prune
  MissingSoftLabels,
  InvalidConfig,
  EmptyTable,
  RateOutOfRange,
  UnknownSampleId,
  // reference trainer
  RatioOutOfRange,
  DivergenceDetected,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace trajprune
