#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "trajprune/prune.hpp"
#include "trajprune/purify.hpp"

namespace trajprune {

struct ManifestEntry {
  SampleId sample_id = 0;
  ClassId label = 0;
  /// Opaque reference to the payload (a file path or "<features file>#<row>").
  std::string payload_ref;
  bool corrected = false;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

using Manifest = std::vector<ManifestEntry>;

/// One JSON object per line: {sample_id, label, payload_ref[, corrected]}.
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// Drops removed ids and keeps the original order. Throws UnknownSampleId.
Manifest apply_plan(const Manifest& manifest, const PrunePlan& plan);
/// Drops outliers and pruned samples; relabeled entries carry the new label
/// and corrected = true.
Manifest apply_plan(const Manifest& manifest, const PurificationPlan& plan);

}  // namespace trajprune
