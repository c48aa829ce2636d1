#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "trajprune/metrics.hpp"
#include "trajprune/prune.hpp"
#include "trajprune/purify.hpp"

using namespace trajprune;

namespace {

void BM_ScoreDataset(benchmark::State& state, Metric metric) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto log = benchfix::random_log(n, 10, 20);
  const auto sel = metric == Metric::El2n ? EpochSelector::single(20) : EpochSelector::every_k(1);
  for (auto _ : state) benchmark::DoNotOptimize(score_dataset(log, metric, sel));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK_CAPTURE(BM_ScoreDataset, entropy, Metric::Entropy)->Arg(1000)->Arg(10000);
BENCHMARK_CAPTURE(BM_ScoreDataset, aum, Metric::Aum)->Arg(10000);
BENCHMARK_CAPTURE(BM_ScoreDataset, forgetting, Metric::Forgetting)->Arg(10000);
BENCHMARK_CAPTURE(BM_ScoreDataset, el2n, Metric::El2n)->Arg(10000);

void BM_RankAndPlan(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto table = score_dataset(benchfix::random_log(n, 10, 5), Metric::Entropy, EpochSelector::every_k(1));
  for (auto _ : state) benchmark::DoNotOptimize(make_prune_plan(rank_samples(table), 0.3));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_RankAndPlan)->Arg(10000)->Arg(100000);

void BM_Purify(benchmark::State& state) {
  const auto log = benchfix::random_log(10000, 10, 20);
  const auto table = score_dataset(log, Metric::Entropy, EpochSelector::every_k(1));
  PurifyConfig cfg;
  cfg.prune_rate = 0.2;
  for (auto _ : state) benchmark::DoNotOptimize(purify_pipeline(log, table, cfg));
}
BENCHMARK(BM_Purify);

}  // namespace
