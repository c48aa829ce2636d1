#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "trajprune/metrics.hpp"
#include "trajprune/synthetic.hpp"
#include "trajprune/trainer.hpp"

namespace trajprune {

/// Retrains on the kept rows of `train` and returns held-out accuracy.
double retrain_accuracy(const SyntheticDataset& train, std::span<const SampleId> kept_ids,
                        const SyntheticDataset& heldout, const TrainConfig& cfg);

/// Ids kept after removing ⌈rate · n⌉ uniformly random samples.
std::vector<SampleId> random_keep(std::span<const SampleId> ids, double rate, std::uint64_t seed);

struct CompareConfig {
  /// Metric names understood by parse_metric, plus "random".
  std::vector<std::string> metrics{"entropy", "random"};
  std::vector<double> rates{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::size_t n_seeds = 4;
  TrainConfig train;
  /// Epoch used by EL2N; 0 means the last logged epoch.
  Epoch el2n_epoch = 0;
  /// Upper bound on worker threads; 0 means hardware concurrency.
  unsigned threads = 0;
  /// Emit the leading "none" row (retraining on the full dataset).
  bool include_baseline = true;
};

struct CompareRow {
  double rate = 0.0;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
  std::vector<double> per_seed;
};

/// For every (metric, rate) cell, prunes by the metric's ranking (or at
/// random), retrains n_seeds times and aggregates held-out accuracy. The
/// first row is the "none" baseline on the full dataset unless disabled.
/// Retraining seed s is derive_seed(cfg.train.seed, s) in every cell.
std::vector<CompareRow> compare_pruning(const SyntheticDataset& train, const SyntheticDataset& heldout,
                                        const TrajectoryLog& log, const CompareConfig& cfg);

}  // namespace trajprune
