#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <unistd.h>

#include "trajprune/error.hpp"
#include "trajprune/rng.hpp"
#include "trajprune/trajectory.hpp"

namespace testsupport {

namespace fs = std::filesystem;

// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("trajprune_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const fs::path& path() const { return path_; }
  [[nodiscard]] fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::vector<char> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const fs::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Random valid log; logits uniform in [-scale, scale].
inline trajprune::TrajectoryLog random_log(trajprune::Rng& rng, std::size_t n, std::uint32_t c, std::uint32_t T,
                                           double scale = 8.0) {
  std::vector<trajprune::SampleId> ids(n);
  std::vector<trajprune::ClassId> labels(n);
  // Sparse, shuffled ids so nothing accidentally relies on ids == indices.
  std::uint64_t next = rng.below(1000);
  for (std::size_t i = 0; i < n; ++i) {
    next += 1 + rng.below(50);
    ids[i] = next;
    labels[i] = static_cast<trajprune::ClassId>(rng.below(c));
  }
  for (std::size_t i = n; i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);
  auto log = trajprune::make_log(ids, labels, c, T, rng.next_u64());
  for (auto& v : log.logits) v = static_cast<float>((2.0 * rng.uniform() - 1.0) * scale);
  return log;
}

}  // namespace testsupport
