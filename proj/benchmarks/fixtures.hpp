#pragma once

#include <numeric>

#include "trajprune/rng.hpp"
#include "trajprune/trajectory.hpp"

namespace benchfix {

// Dense random log with ids 0..n-1.
inline trajprune::TrajectoryLog random_log(std::size_t n, std::uint32_t c, std::uint32_t t,
                                           std::uint64_t seed = 1) {
  std::vector<trajprune::SampleId> ids(n);
  std::iota(ids.begin(), ids.end(), trajprune::SampleId{0});
  std::vector<trajprune::ClassId> labels(n);
  trajprune::Rng rng(seed);
  for (auto& y : labels) y = static_cast<trajprune::ClassId>(rng.below(c));
  auto log = trajprune::make_log(std::move(ids), std::move(labels), c, t, seed);
  for (float& z : log.logits) z = static_cast<float>(3.0 * rng.normal());
  return log;
}

}  // namespace benchfix
