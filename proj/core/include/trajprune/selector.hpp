#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trajprune/trajectory.hpp"

namespace trajprune {

/// Which logged epochs feed an epoch-averaged metric.
class EpochSelector {
 public:
  enum class Mode { EveryK, Single, UpTo, Explicit };

  static EpochSelector every_k(std::uint32_t k);
  static EpochSelector single(Epoch t);
  static EpochSelector upto(Epoch t);
  static EpochSelector explicit_epochs(std::vector<Epoch> epochs);

  /// Inverse of to_string(); throws InvalidConfig on malformed text.
  static EpochSelector parse(const std::string& text);

  [[nodiscard]] Mode mode() const noexcept { return mode_; }
  [[nodiscard]] std::uint32_t parameter() const noexcept { return param_; }

  /// Sorted, duplicate-free epochs selected from a log with n_epochs epochs.
  /// Throws SelectorOutOfRange if the set is empty or leaves [1, n_epochs].
  [[nodiscard]] std::vector<Epoch> resolve(std::uint32_t n_epochs) const;

  /// "every_k:6", "single:12", "upto:12", "explicit:1,4,7".
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const EpochSelector&, const EpochSelector&) = default;

 private:
  EpochSelector(Mode mode, std::uint32_t param, std::vector<Epoch> epochs)
      : mode_(mode), param_(param), epochs_(std::move(epochs)) {}

  Mode mode_;
  std::uint32_t param_;
  std::vector<Epoch> epochs_;
};

}  // namespace trajprune
