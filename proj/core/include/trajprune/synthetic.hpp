#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "trajprune/trajectory.hpp"

namespace trajprune {

struct SyntheticSpec {
  std::uint32_t n_classes = 3;
  std::uint32_t dim = 2;
  std::uint32_t n_per_class = 200;
  /// n_classes × dim, row-major.
  std::vector<double> class_means;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  /// Fraction of each class drawn as near-duplicates of its class mean.
  double duplicate_fraction = 0.0;
  /// Standard deviation of near-duplicates around the mean.
  double duplicate_jitter = 0.0;

  /// Throws InvalidConfig: sigma > 0, distinct means, shapes consistent.
  void check() const;
};

/// Class means whose minimum pairwise distance is separation · sigma.
/// Depends only on the geometry, never on a seed, so train and held-out
/// splits drawn with different seeds share the same means.
std::vector<double> separated_means(std::uint32_t n_classes, std::uint32_t dim,
                                    double separation, double sigma);

struct FlipEntry {
  SampleId sample_id;
  ClassId true_label;
  ClassId flipped_label;

  friend bool operator==(const FlipEntry&, const FlipEntry&) = default;
};

using FlipRecord = std::vector<FlipEntry>;

struct SyntheticDataset {
  std::uint32_t n_classes = 0;
  std::uint32_t dim = 0;
  std::vector<SampleId> sample_ids;
  std::vector<ClassId> labels;
  /// n × dim, row-major.
  std::vector<float> features;
  /// True for planted near-duplicates; empty when not tracked (e.g. loaded from disk).
  std::vector<bool> planted_duplicate;

  [[nodiscard]] std::size_t size() const noexcept { return sample_ids.size(); }
  [[nodiscard]] std::span<const float> feature_row(std::size_t i) const {
    return {features.data() + i * dim, dim};
  }

  friend bool operator==(const SyntheticDataset&, const SyntheticDataset&) = default;
};

/// Class-major samples with ids 0..n-1; sample i of class k ~ N(mean_k, sigma² I).
SyntheticDataset synth_dataset(const SyntheticSpec& spec);

/// Flips exactly ⌊ratio · n⌋ labels, each to a uniformly chosen different class.
/// Throws RatioOutOfRange unless ratio ∈ [0, 1).
std::pair<SyntheticDataset, FlipRecord> inject_label_noise(const SyntheticDataset& ds,
                                                           double ratio, std::uint64_t seed);

/// Rows of `ds` whose ids appear in `ids`, in the dataset's original order.
SyntheticDataset subset(const SyntheticDataset& ds, std::span<const SampleId> ids);

// ---- serialization ---------------------------------------------------------

/// Writes `<stem>.manifest.jsonl` and `<stem>.features.bin`. Manifest payload
/// refs are "<features file name>#<row>".
void write_dataset(const SyntheticDataset& ds, const std::filesystem::path& manifest_path,
                   const std::filesystem::path& features_path);

/// Loads a manifest and resolves its payload refs against feature files next
/// to it. Works for pruned or relabeled manifests too.
SyntheticDataset read_dataset(const std::filesystem::path& manifest_path);

/// Feature file: "LFEA", u32 version, u64 n, u32 dim, then n × dim f32 (little-endian).
void write_features(std::span<const float> features, std::uint64_t n, std::uint32_t dim,
                    const std::filesystem::path& path);
std::vector<float> read_features(const std::filesystem::path& path, std::uint64_t& n,
                                 std::uint32_t& dim);

void write_flip_record(const FlipRecord& record, const std::filesystem::path& path);
FlipRecord read_flip_record(const std::filesystem::path& path);

}  // namespace trajprune
