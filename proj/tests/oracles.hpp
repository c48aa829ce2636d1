#pragma once

// Independent reference implementations used to check the production code.
// Everything here is deliberately naive: 50-digit arithmetic, no max-shift,
// brute-force scans.

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using big = boost::multiprecision::cpp_bin_float_50;

inline std::vector<big> softmax(std::span<const double> z) {
  std::vector<big> e(z.size());
  big sum = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    e[i] = exp(big(z[i]));
    sum += e[i];
  }
  for (auto& v : e) v /= sum;
  return e;
}

inline big entropy_bits(const std::vector<big>& p) {
  big h = 0;
  for (const auto& v : p) {
    if (v > 0) h -= v * log(v);
  }
  return h / log(big(2));
}

inline big el2n(std::span<const double> z, std::size_t y) {
  const auto p = softmax(z);
  big s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const big d = p[i] - (i == y ? big(1) : big(0));
    s += d * d;
  }
  return sqrt(s);
}

inline big cross_entropy(std::span<const double> z, std::size_t y) { return -log(softmax(z)[y]); }

inline std::size_t argmax_first(std::span<const float> z) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < z.size(); ++i) {
    if (z[i] > z[best]) best = i;
  }
  return best;
}

// Forgetting by literal definition over a correctness sequence.
inline std::size_t forgetting(const std::vector<bool>& correct) {
  if (std::none_of(correct.begin(), correct.end(), [](bool b) { return b; })) return correct.size();
  std::size_t count = 0;
  for (std::size_t t = 0; t + 1 < correct.size(); ++t) {
    if (correct[t] && !correct[t + 1]) ++count;
  }
  return count;
}

// Selection-sort ranking by (score, id): quadratic on purpose.
inline std::vector<std::uint64_t> rank(std::vector<std::pair<double, std::uint64_t>> items) {
  std::vector<std::uint64_t> out;
  while (!items.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < items.size(); ++i) {
      if (items[i].first < items[best].first ||
          (items[i].first == items[best].first && items[i].second < items[best].second)) {
        best = i;
      }
    }
    out.push_back(items[best].second);
    items.erase(items.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return out;
}

}  // namespace oracle
