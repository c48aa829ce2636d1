#include "trajprune/compare.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>
#include <unordered_set>

#include "trajprune/error.hpp"
#include "trajprune/prune.hpp"
#include "trajprune/rng.hpp"

namespace trajprune {

namespace {

constexpr std::uint64_t kRandomPruneStream = 0x52414E44;  // "RAND"

// Ranking key where low means easy. AUM is a margin (high = easy), so it is negated.
ScoreTable importance_table(const TrajectoryLog& log, Metric metric, Epoch el2n_epoch) {
  const EpochSelector sel = metric == Metric::El2n
                                ? EpochSelector::single(el2n_epoch == 0 ? log.n_epochs : el2n_epoch)
                                : EpochSelector::every_k(1);
  ScoreTable t = score_dataset(log, metric, sel);
  if (metric == Metric::Aum) {
    for (double& s : t.scores) s = -s;
  }
  return t;
}

}  // namespace

double retrain_accuracy(const SyntheticDataset& train, std::span<const SampleId> kept_ids,
                        const SyntheticDataset& heldout, const TrainConfig& cfg) {
  SyntheticDataset sub = subset(train, kept_ids);
  if (sub.size() == 0) return 0.0;
  TrainConfig weights_only = cfg;
  weights_only.record_logits = false;
  const TrainRun run = train_softmax_run(sub, weights_only);
  return accuracy(run.weights, heldout);
}

std::vector<SampleId> random_keep(std::span<const SampleId> ids, double rate, std::uint64_t seed) {
  const std::size_t n = ids.size();
  const std::size_t k = prune_count(rate, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
  std::vector<bool> removed(n, false);
  for (std::size_t i = 0; i < k; ++i) removed[idx[i]] = true;
  std::vector<SampleId> kept;
  kept.reserve(n - k);
  for (std::size_t i = 0; i < n; ++i) {
    if (!removed[i]) kept.push_back(ids[i]);
  }
  return kept;
}

std::vector<CompareRow> compare_pruning(const SyntheticDataset& train, const SyntheticDataset& heldout,
                                        const TrajectoryLog& log, const CompareConfig& cfg) {
  cfg.train.check();
  if (cfg.n_seeds == 0) throw Error(ErrorCode::InvalidConfig, "n_seeds must be >= 1");
  for (double r : cfg.rates) {
    if (!(r >= 0.0 && r < 1.0)) throw Error(ErrorCode::RateOutOfRange, "rates must lie in [0, 1)");
  }
  {
    const std::unordered_set<SampleId> a(train.sample_ids.begin(), train.sample_ids.end());
    bool same = a.size() == log.n_samples();
    for (SampleId id : log.sample_ids) same = same && a.contains(id);
    if (!same) throw Error(ErrorCode::SampleSetMismatch, "trajectory log does not cover the training set");
  }

  // Row layout: "none", then metric-major cells.
  struct Cell {
    std::string metric;
    double rate;
    std::vector<std::vector<SampleId>> kept;  // per seed
  };
  std::vector<Cell> cells;
  if (cfg.include_baseline) {
    cells.push_back({"none", 0.0, std::vector<std::vector<SampleId>>(cfg.n_seeds, train.sample_ids)});
  }
  for (const auto& name : cfg.metrics) {
    if (name == "random") {
      for (std::size_t r = 0; r < cfg.rates.size(); ++r) {
        Cell cell{name, cfg.rates[r], {}};
        for (std::size_t s = 0; s < cfg.n_seeds; ++s) {
          const std::uint64_t seed = derive_seed(derive_seed(cfg.train.seed, kRandomPruneStream + s), r);
          cell.kept.push_back(random_keep(train.sample_ids, cfg.rates[r], seed));
        }
        cells.push_back(std::move(cell));
      }
      continue;
    }
    const Ranking ranking = rank_samples(importance_table(log, parse_metric(name), cfg.el2n_epoch));
    for (double rate : cfg.rates) {
      const PrunePlan plan = make_prune_plan(ranking, rate);
      cells.push_back({name, rate, std::vector<std::vector<SampleId>>(cfg.n_seeds, plan.kept_ids)});
    }
  }

  // Same retraining seeds in every cell, so a rate-0 cell reproduces "none".
  const std::size_t tasks = cells.size() * cfg.n_seeds;
  std::vector<double> acc(tasks, 0.0);
  std::vector<std::exception_ptr> failures(tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      const std::size_t c = t / cfg.n_seeds;
      const std::size_t s = t % cfg.n_seeds;
      TrainConfig tc = cfg.train;
      tc.seed = derive_seed(cfg.train.seed, s);
      try {
        acc[t] = retrain_accuracy(train, cells[c].kept[s], heldout, tc);
      } catch (...) {
        failures[t] = std::current_exception();
      }
    }
  };
  unsigned threads = cfg.threads != 0 ? cfg.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  std::vector<CompareRow> rows;
  rows.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CompareRow row;
    row.metric = cells[c].metric;
    row.rate = cells[c].rate;
    row.n = cfg.n_seeds;
    row.per_seed.assign(acc.begin() + static_cast<std::ptrdiff_t>(c * cfg.n_seeds),
                        acc.begin() + static_cast<std::ptrdiff_t>((c + 1) * cfg.n_seeds));
    row.mean = std::accumulate(row.per_seed.begin(), row.per_seed.end(), 0.0) / static_cast<double>(row.n);
    double ss = 0.0;
    for (double a : row.per_seed) ss += (a - row.mean) * (a - row.mean);
    row.std = row.n > 1 ? std::sqrt(ss / static_cast<double>(row.n - 1)) : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace trajprune
