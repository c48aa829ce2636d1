#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "trajprune/metrics.hpp"
#include "trajprune/trajectory.hpp"

namespace trajprune {

inline constexpr double kDefaultOutlierDelta = 0.10;

struct PurifyConfig {
  /// Outlier threshold on max(soft label), inclusive.
  double delta = kDefaultOutlierDelta;
  double prune_rate = 0.0;
  bool enable_correction = true;
  bool enable_outlier_removal = true;

  /// Throws InvalidConfig unless delta ∈ (0,1) and prune_rate ∈ [0,1).
  void check() const;
};

struct LabelCorrection {
  SampleId sample_id;
  ClassId old_label;
  ClassId new_label;

  friend bool operator==(const LabelCorrection&, const LabelCorrection&) = default;
};

/// Samples whose soft-label argmax disagrees with the logged label, in log order.
std::vector<LabelCorrection> correct_labels(const TrajectoryLog& log, const ScoreTable& table);

/// Samples with max(soft label) ≤ delta, in table order.
std::vector<SampleId> detect_outliers(const ScoreTable& table, double delta);

enum class Verdict { Keep, Relabel, RemoveOutlier, PruneEasy };

std::string_view to_string(Verdict verdict) noexcept;
Verdict parse_verdict(std::string_view text);

struct PlanEntry {
  SampleId sample_id = 0;
  Verdict verdict = Verdict::Keep;
  ClassId old_label = 0;
  /// Equals old_label unless verdict is Relabel.
  ClassId new_label = 0;
  double entropy = 0.0;
  double max_prob = 0.0;

  friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

struct PurificationPlan {
  std::vector<PlanEntry> entries;  // log order
  std::size_t n_outliers = 0;
  std::size_t n_corrected = 0;
  std::size_t n_pruned_easy = 0;
  /// ⌈prune_rate · n⌉.
  std::size_t budget = 0;
  PurifyConfig config;
  Metric source_metric = Metric::Entropy;
  EpochSelector source_selector = EpochSelector::every_k(1);

  [[nodiscard]] std::size_t n_removed() const noexcept { return n_outliers + n_pruned_easy; }
};

/// Outlier removal, then label correction, then easy-sample pruning by
/// ascending entropy (ties by ascending sample id) up to the budget left
/// after outliers.
PurificationPlan purify_pipeline(const TrajectoryLog& log, const ScoreTable& table,
                                 const PurifyConfig& cfg);

/// CSV `sample_id,verdict,old_label,new_label,entropy,max_prob` and a JSON
/// summary at `<path>.json`.
void write_purification_plan(const PurificationPlan& plan, const std::filesystem::path& csv_path);
/// Reads the CSV (and the summary, when present) back.
PurificationPlan read_purification_plan(const std::filesystem::path& csv_path);

}  // namespace trajprune
