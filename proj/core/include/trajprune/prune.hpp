#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "trajprune/metrics.hpp"

namespace trajprune {

/// ⌈rate · n⌉, ignoring floating-point residue (0.07 · 100 gives 7, not 8).
std::size_t prune_count(double rate, std::size_t n);

/// Sample ids ordered from easiest (lowest score) to hardest.
struct Ranking {
  Metric metric = Metric::Entropy;
  std::vector<SampleId> order;
  std::vector<double> scores;  // aligned with order
};

/// Ascending by (score, sample_id). Throws EmptyTable.
Ranking rank_samples(const ScoreTable& table);

struct PrunePlan {
  double rate = 0.0;
  std::vector<SampleId> removed_ids;  // ranking order
  std::vector<SampleId> kept_ids;     // ranking order
};

/// Removes the first ⌈rate · n⌉ ids of the ranking. Throws RateOutOfRange.
PrunePlan make_prune_plan(const Ranking& ranking, double rate);

/// CSV `sample_id,rank,score,removed` in ranking order.
void write_prune_plan(const Ranking& ranking, const PrunePlan& plan,
                      const std::filesystem::path& csv_path);
PrunePlan read_prune_plan(const std::filesystem::path& csv_path);

}  // namespace trajprune
