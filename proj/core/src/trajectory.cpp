#include "trajprune/trajectory.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "trajprune/error.hpp"

namespace trajprune {

namespace {

std::size_t row_offset(const TrajectoryLog& log, Epoch epoch, std::size_t sample) {
  if (epoch < 1 || epoch > log.n_epochs) {
    throw Error(ErrorCode::EpochOutOfRange,
                "epoch " + std::to_string(epoch) + " not in [1, " + std::to_string(log.n_epochs) + "]");
  }
  return ((std::size_t{epoch} - 1) * log.n_samples() + sample) * log.n_classes;
}

}  // namespace

std::span<const float> TrajectoryLog::row(Epoch epoch, std::size_t sample) const {
  return {logits.data() + row_offset(*this, epoch, sample), n_classes};
}

std::span<float> TrajectoryLog::row(Epoch epoch, std::size_t sample) {
  return {logits.data() + row_offset(*this, epoch, sample), n_classes};
}

std::span<const float> TrajectoryLog::epoch_block(Epoch epoch) const {
  return {logits.data() + row_offset(*this, epoch, 0), n_samples() * n_classes};
}

std::vector<std::span<const float>> TrajectoryLog::trajectory(std::size_t sample) const {
  std::vector<std::span<const float>> out;
  out.reserve(n_epochs);
  for (Epoch t = 1; t <= n_epochs; ++t) out.push_back(row(t, sample));
  return out;
}

std::optional<std::size_t> TrajectoryLog::index_of(SampleId id) const {
  for (std::size_t i = 0; i < sample_ids.size(); ++i) {
    if (sample_ids[i] == id) return i;
  }
  return std::nullopt;
}

TrajectoryLog make_log(std::vector<SampleId> ids, std::vector<ClassId> labels,
                       std::uint32_t n_classes, std::uint32_t n_epochs, std::uint64_t run_seed) {
  TrajectoryLog log;
  log.n_classes = n_classes;
  log.n_epochs = n_epochs;
  log.run_seed = run_seed;
  log.logits.assign(ids.size() * n_classes * n_epochs, 0.0F);
  log.sample_ids = std::move(ids);
  log.labels = std::move(labels);
  return log;
}

std::string_view to_string(IssueCode code) noexcept {
  switch (code) {
    case IssueCode::LabelOutOfRange: return "LabelOutOfRange";
    case IssueCode::NonFinite: return "NonFinite";
    case IssueCode::DuplicateSampleId: return "DuplicateSampleId";
    case IssueCode::ShapeMismatch: return "ShapeMismatch";
    case IssueCode::NoEpochs: return "NoEpochs";
    case IssueCode::NoClasses: return "NoClasses";
    case IssueCode::UnsupportedVersion: return "UnsupportedVersion";
  }
  return "Unknown";
}

ValidationReport validate(const TrajectoryLog& log) {
  ValidationReport report;
  auto add = [&](IssueCode code, std::optional<SampleId> id, std::optional<Epoch> epoch,
                 std::string message) {
    report.issues.push_back({code, id, epoch, std::move(message)});
  };

  if (log.schema_version != kLogSchemaVersion) {
    add(IssueCode::UnsupportedVersion, std::nullopt, std::nullopt,
        "schema version " + std::to_string(log.schema_version));
  }
  if (log.n_classes == 0) add(IssueCode::NoClasses, std::nullopt, std::nullopt, "n_classes is 0");
  if (log.n_epochs == 0) add(IssueCode::NoEpochs, std::nullopt, std::nullopt, "n_epochs is 0");

  const std::size_t n = log.n_samples();
  if (log.labels.size() != n) {
    add(IssueCode::ShapeMismatch, std::nullopt, std::nullopt,
        "labels has " + std::to_string(log.labels.size()) + " entries, expected " + std::to_string(n));
  }
  const std::size_t expected = n * log.n_classes * log.n_epochs;
  const bool shape_ok = log.logits.size() == expected;
  if (!shape_ok) {
    add(IssueCode::ShapeMismatch, std::nullopt, std::nullopt,
        "logits has " + std::to_string(log.logits.size()) + " values, expected " + std::to_string(expected));
  }

  std::unordered_set<SampleId> seen;
  seen.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SampleId id = log.sample_ids[i];
    if (!seen.insert(id).second) {
      add(IssueCode::DuplicateSampleId, id, std::nullopt, "sample id repeated");
    }
    if (i < log.labels.size() && log.labels[i] >= log.n_classes) {
      add(IssueCode::LabelOutOfRange, id, std::nullopt,
          "label " + std::to_string(log.labels[i]) + " >= n_classes " + std::to_string(log.n_classes));
    }
  }

  if (shape_ok) {
    for (Epoch t = 1; t <= log.n_epochs; ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        for (float v : log.row(t, i)) {
          if (!std::isfinite(v)) {
            add(IssueCode::NonFinite, log.sample_ids[i], t, "non-finite logit");
            break;
          }
        }
      }
    }
  }

  report.ok = report.issues.empty();
  return report;
}

}  // namespace trajprune
