#include <benchmark/benchmark.h>

#include "trajprune/synthetic.hpp"
#include "trajprune/trainer.hpp"

using namespace trajprune;

namespace {

SyntheticDataset dataset(std::uint32_t classes, std::uint32_t dim, std::uint32_t per_class) {
  SyntheticSpec spec;
  spec.n_classes = classes;
  spec.dim = dim;
  spec.n_per_class = per_class;
  spec.seed = 3;
  spec.class_means = separated_means(classes, dim, 6.0, 1.0);
  return synth_dataset(spec);
}

// One epoch of SGD; range(1) toggles the per-epoch logit snapshot.
void BM_TrainEpoch(benchmark::State& state) {
  const auto ds = dataset(static_cast<std::uint32_t>(state.range(0)), 50, 100);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.record_logits = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(train_softmax_run(ds, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.size()));
}
BENCHMARK(BM_TrainEpoch)->Args({10, 1})->Args({50, 1})->Args({50, 0})->Unit(benchmark::kMillisecond);

void BM_LossAndGrad(benchmark::State& state) {
  const auto ds = dataset(10, 50, 4);
  Weights w(10, 50);
  const Batch batch{ds.features, ds.labels};
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad(w, batch));
}
BENCHMARK(BM_LossAndGrad);

}  // namespace
