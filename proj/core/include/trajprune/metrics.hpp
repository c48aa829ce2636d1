#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trajprune/selector.hpp"
#include "trajprune/trajectory.hpp"

namespace trajprune {

/// Class-probability vector obtained from averaged logits.
struct SoftLabel {
  std::vector<double> probs;

  [[nodiscard]] double max_prob() const;
  /// Lowest index among the maximal entries.
  [[nodiscard]] ClassId argmax() const;

  friend bool operator==(const SoftLabel&, const SoftLabel&) = default;
};

enum class Metric { Entropy, Aum, Forgetting, El2n, MovingAvgLoss };

/// "entropy", "aum", "forgetting", "el2n", "mal".
std::string_view to_string(Metric metric) noexcept;
/// Accepts the names above; throws InvalidConfig otherwise.
Metric parse_metric(std::string_view name);
/// "bits" for entropy, "nats" for moving-average loss, "logit" for AUM, "count", "l2".
std::string_view score_unit(Metric metric) noexcept;

// ---- primitives on plain vectors -------------------------------------------

/// Max-shifted softmax in double precision.
std::vector<double> softmax(std::span<const double> logits);
std::vector<double> softmax(std::span<const float> logits);

/// log Σ exp(z_i), max-shifted.
double log_sum_exp(std::span<const float> logits);

/// Lowest index of the maximum entry.
ClassId argmax(std::span<const float> logits);

SoftLabel soft_label(std::span<const double> mean_logits);

/// Shannon entropy in bits, with 0·log 0 = 0, clamped to [0, log2 c].
double entropy_score(const SoftLabel& label);

// ---- per-sample metrics on a log -------------------------------------------

/// Mean logit vector of one sample over the selected epochs (64-bit accumulation).
std::vector<double> mean_logits(const TrajectoryLog& log, std::size_t sample,
                                const EpochSelector& sel);

/// Mean over selected epochs of z_y − max_{i≠y} z_i. Requires c ≥ 2.
double aum_score(const TrajectoryLog& log, std::size_t sample, const EpochSelector& sel);

/// Number of correct→incorrect transitions between consecutive selected epochs;
/// a sample never classified correctly scores the number of selected epochs.
double forgetting_score(const TrajectoryLog& log, std::size_t sample,
                        const EpochSelector& sel);
double forgetting_score(const TrajectoryLog& log, std::size_t sample);

/// ‖softmax(z^(t)) − onehot(y)‖₂ at one epoch.
double el2n_score(const TrajectoryLog& log, std::size_t sample, Epoch at_epoch);

/// Mean cross-entropy (nats) over the selected epochs.
double moving_avg_loss(const TrajectoryLog& log, std::size_t sample,
                       const EpochSelector& sel);

// ---- whole-dataset scoring -------------------------------------------------

struct ScoreTable {
  Metric metric = Metric::Entropy;
  EpochSelector selector = EpochSelector::every_k(1);
  std::uint32_t n_classes = 0;
  std::string source_log;
  std::vector<SampleId> sample_ids;
  std::vector<ClassId> labels;
  std::vector<double> scores;
  /// Present for entropy tables.
  std::optional<std::vector<SoftLabel>> soft_labels;

  [[nodiscard]] std::size_t size() const noexcept { return scores.size(); }
};

/// Applies one metric to every sample. EL2N needs a single-epoch selector;
/// any other selector for it raises MetricSelectorMismatch.
ScoreTable score_dataset(const TrajectoryLog& log, Metric metric, const EpochSelector& sel);

/// Per-sample mean of scores across tables, aligned by sample id. The result
/// follows the first table's sample order. Soft labels survive only for a
/// single input table.
ScoreTable ensemble_average(std::span<const ScoreTable> tables);

}  // namespace trajprune
