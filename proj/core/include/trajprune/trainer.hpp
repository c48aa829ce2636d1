#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "trajprune/error.hpp"
#include "trajprune/synthetic.hpp"
#include "trajprune/trajectory.hpp"

namespace trajprune {

/// Linear softmax classifier weights, c × (dim + 1); the last column is the bias.
struct Weights {
  std::uint32_t n_classes = 0;
  std::uint32_t dim = 0;
  std::vector<double> values;

  Weights() = default;
  Weights(std::uint32_t classes, std::uint32_t features)
      : n_classes(classes), dim(features), values(std::size_t{classes} * (features + 1), 0.0) {}

  [[nodiscard]] std::size_t cols() const noexcept { return std::size_t{dim} + 1; }
  double& at(std::size_t cls, std::size_t col) { return values[cls * cols() + col]; }
  [[nodiscard]] double at(std::size_t cls, std::size_t col) const { return values[cls * cols() + col]; }

  /// Logits W·[x; 1] for one feature row.
  void logits(std::span<const float> x, std::span<double> out) const;
};

struct Batch {
  std::span<const float> features;  // B × dim
  std::span<const ClassId> labels;  // B
};

struct LossAndGrad {
  double loss = 0.0;
  Weights grad;
};

/// Mean cross-entropy over the batch and its gradient (1/B) Σ (p − onehot(y)) x̂ᵀ.
LossAndGrad loss_and_grad(const Weights& weights, const Batch& batch);

struct TrainConfig {
  std::uint32_t epochs = 12;
  std::uint32_t batch_size = 32;
  double learning_rate = 0.1;
  double weight_init_scale = 0.01;
  std::uint64_t seed = 0;
  /// When false the run keeps only the final weights; log stays empty.
  bool record_logits = true;

  /// Throws InvalidConfig.
  void check() const;
};

struct TrainRun {
  TrajectoryLog log;
  Weights weights;
  /// Mean mini-batch loss per epoch.
  std::vector<double> epoch_loss;
};

/// Mini-batch SGD with a seeded shuffle per epoch; after each epoch the
/// logits of every sample are appended to the log.
TrainRun train_softmax_run(const SyntheticDataset& ds, const TrainConfig& cfg);
TrajectoryLog train_softmax(const SyntheticDataset& ds, const TrainConfig& cfg);

/// Raised on a non-finite loss; carries the epochs completed so far.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, TrajectoryLog partial)
      : Error(ErrorCode::DivergenceDetected, message), partial_(std::move(partial)) {}

  [[nodiscard]] const TrajectoryLog& partial_log() const noexcept { return partial_; }

 private:
  TrajectoryLog partial_;
};

/// Fraction of rows whose argmax logit equals the row's label.
double accuracy(const Weights& weights, const SyntheticDataset& ds);

}  // namespace trajprune
