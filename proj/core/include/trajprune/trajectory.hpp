#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace trajprune {

using SampleId = std::uint64_t;
using ClassId = std::uint32_t;

/// 1-based epoch index, matching the on-disk numbering.
using Epoch = std::uint32_t;

inline constexpr std::uint32_t kLogSchemaVersion = 1;

/// Per-epoch logits of every sample, plus the labels they were trained on.
///
/// Logits are kept as f32 (the storage precision); all arithmetic downstream
/// promotes to double. The buffer is epoch-major: epoch t (1-based) occupies
/// rows [(t-1)*n, t*n), each row holding n_classes values.
struct TrajectoryLog {
  std::uint32_t schema_version = kLogSchemaVersion;
  std::uint32_t n_classes = 0;
  std::uint32_t n_epochs = 0;
  std::uint64_t run_seed = 0;
  std::vector<SampleId> sample_ids;
  std::vector<ClassId> labels;
  std::vector<float> logits;

  [[nodiscard]] std::size_t n_samples() const noexcept { return sample_ids.size(); }

  [[nodiscard]] std::span<const float> row(Epoch epoch, std::size_t sample) const;
  [[nodiscard]] std::span<float> row(Epoch epoch, std::size_t sample);

  /// The n × c matrix of one epoch.
  [[nodiscard]] std::span<const float> epoch_block(Epoch epoch) const;

  /// Strided view over one sample's trajectory: element t-1 is its logit row at epoch t.
  [[nodiscard]] std::vector<std::span<const float>> trajectory(std::size_t sample) const;

  /// Index of a sample id, or nullopt. Linear scan; build an index for bulk lookups.
  [[nodiscard]] std::optional<std::size_t> index_of(SampleId id) const;

  friend bool operator==(const TrajectoryLog&, const TrajectoryLog&) = default;
};

/// Allocates a zero-filled log with the given shape.
TrajectoryLog make_log(std::vector<SampleId> ids, std::vector<ClassId> labels,
                       std::uint32_t n_classes, std::uint32_t n_epochs,
                       std::uint64_t run_seed = 0);

enum class IssueCode {
  LabelOutOfRange,
  NonFinite,
  DuplicateSampleId,
  ShapeMismatch,
  NoEpochs,
  NoClasses,
  UnsupportedVersion,
};

std::string_view to_string(IssueCode code) noexcept;

struct ValidationIssue {
  IssueCode code;
  std::optional<SampleId> sample_id;
  std::optional<Epoch> epoch;
  std::string message;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationIssue> issues;
};

/// Reports every invariant violation; never throws.
ValidationReport validate(const TrajectoryLog& log);

}  // namespace trajprune
