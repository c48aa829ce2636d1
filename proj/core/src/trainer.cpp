#include "trajprune/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "trajprune/metrics.hpp"
#include "trajprune/rng.hpp"

namespace trajprune {

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

// Adds the batch gradient into grad (pre-zeroed) and returns the summed loss.
double accumulate(const Weights& w, std::span<const float> features, std::span<const ClassId> labels,
                  Weights& grad, std::vector<double>& scratch) {
  const std::size_t dim = w.dim;
  const std::size_t c = w.n_classes;
  scratch.resize(c);
  double loss = 0.0;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    const auto x = features.subspan(b * dim, dim);
    w.logits(x, scratch);
    double hi = -std::numeric_limits<double>::infinity();
    for (double z : scratch) hi = std::max(hi, z);
    double sum = 0.0;
    for (double& z : scratch) {
      z = std::exp(z - hi);
      sum += z;
    }
    const ClassId y = labels[b];
    loss += std::log(sum) - std::log(scratch[y]);
    for (std::size_t k = 0; k < c; ++k) {
      const double err = scratch[k] / sum - (k == y ? 1.0 : 0.0);
      double* row = grad.values.data() + k * w.cols();
      for (std::size_t d = 0; d < dim; ++d) row[d] += err * static_cast<double>(x[d]);
      row[dim] += err;
    }
  }
  return loss;
}

}  // namespace

void Weights::logits(std::span<const float> x, std::span<double> out) const {
  const std::size_t c = cols();
  for (std::size_t k = 0; k < n_classes; ++k) {
    const double* row = values.data() + k * c;
    double z = row[dim];
    for (std::size_t d = 0; d < dim; ++d) z += row[d] * static_cast<double>(x[d]);
    out[k] = z;
  }
}

LossAndGrad loss_and_grad(const Weights& weights, const Batch& batch) {
  LossAndGrad out{0.0, Weights(weights.n_classes, weights.dim)};
  const std::size_t b = batch.labels.size();
  if (b == 0) return out;
  std::vector<double> scratch;
  out.loss = accumulate(weights, batch.features, batch.labels, out.grad, scratch) / static_cast<double>(b);
  for (double& g : out.grad.values) g /= static_cast<double>(b);
  return out;
}

void TrainConfig::check() const {
  if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::InvalidConfig, "learning_rate must be positive");
  }
  if (!(weight_init_scale >= 0.0)) throw Error(ErrorCode::InvalidConfig, "weight_init_scale must be >= 0");
}

TrainRun train_softmax_run(const SyntheticDataset& ds, const TrainConfig& cfg) {
  cfg.check();
  if (ds.n_classes == 0 || ds.dim == 0 || ds.size() == 0) {
    throw Error(ErrorCode::InvalidConfig, "training set is empty");
  }
  const std::size_t n = ds.size();
  const std::size_t c = ds.n_classes;

  TrainRun run;
  run.weights = Weights(ds.n_classes, ds.dim);
  Rng init(derive_seed(cfg.seed, kInitStream));
  for (double& w : run.weights.values) w = cfg.weight_init_scale * init.normal();

  run.log.n_classes = ds.n_classes;
  run.log.run_seed = cfg.seed;
  run.log.sample_ids = ds.sample_ids;
  run.log.labels = ds.labels;
  if (cfg.record_logits) run.log.logits.reserve(n * c * cfg.epochs);

  Rng shuffle(derive_seed(cfg.seed, kShuffleStream));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<float> batch_x;
  std::vector<ClassId> batch_y;
  std::vector<double> scratch(c);
  Weights grad(ds.n_classes, ds.dim);

  for (std::uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      batch_x.clear();
      batch_y.clear();
      for (std::size_t k = start; k < end; ++k) {
        const auto row = ds.feature_row(order[k]);
        batch_x.insert(batch_x.end(), row.begin(), row.end());
        batch_y.push_back(ds.labels[order[k]]);
      }
      std::fill(grad.values.begin(), grad.values.end(), 0.0);
      const double bsize = static_cast<double>(end - start);
      const double loss = accumulate(run.weights, batch_x, batch_y, grad, scratch) / bsize;
      if (!std::isfinite(loss)) {
        throw DivergenceError("non-finite loss in epoch " + std::to_string(epoch), std::move(run.log));
      }
      const double step = cfg.learning_rate / bsize;
      for (std::size_t k = 0; k < grad.values.size(); ++k) run.weights.values[k] -= step * grad.values[k];
      epoch_loss += loss;
      ++batches;
    }
    run.epoch_loss.push_back(epoch_loss / static_cast<double>(batches));
    if (!cfg.record_logits) continue;

    for (std::size_t i = 0; i < n; ++i) {
      run.weights.logits(ds.feature_row(i), scratch);
      for (double z : scratch) {
        const auto f = static_cast<float>(z);
        if (!std::isfinite(f)) {
          throw DivergenceError("logits overflow after epoch " + std::to_string(epoch), std::move(run.log));
        }
        run.log.logits.push_back(f);
      }
    }
    run.log.n_epochs = epoch;
  }
  return run;
}

TrajectoryLog train_softmax(const SyntheticDataset& ds, const TrainConfig& cfg) {
  return train_softmax_run(ds, cfg).log;
}

double accuracy(const Weights& weights, const SyntheticDataset& ds) {
  if (ds.size() == 0) return 0.0;
  std::vector<double> z(weights.n_classes);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    weights.logits(ds.feature_row(i), z);
    const auto best = static_cast<ClassId>(std::max_element(z.begin(), z.end()) - z.begin());
    if (best == ds.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.size());
}

}  // namespace trajprune
