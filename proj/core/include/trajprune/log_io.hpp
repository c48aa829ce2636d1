#pragma once

#include <cstdint>
#include <filesystem>

#include "trajprune/trajectory.hpp"

namespace trajprune {

enum class LogFormat { Binary, Jsonl };

/// Size of the fixed LTRJ v1 header in bytes.
inline constexpr std::size_t kLtrjHeaderBytes = 32;

/// Reads an LTRJ binary or JSONL log (format sniffed from the leading bytes)
/// and returns a log that satisfies every TrajectoryLog invariant.
///
/// Throws Error with MagicMismatch, TruncatedFile, NonFinite,
/// DuplicateSampleId, EpochGap, FormatError or IoFailure.
TrajectoryLog open_log(const std::filesystem::path& path);

/// Throws FormatError if the log violates its invariants (T = 0 included)
/// and IoFailure if the file cannot be written.
void write_log(const TrajectoryLog& log, const std::filesystem::path& path,
               LogFormat format = LogFormat::Binary);

/// Exact byte size of the binary encoding for the given shape.
std::uint64_t binary_log_size(std::uint64_t n_samples, std::uint32_t n_classes,
                              std::uint32_t n_epochs) noexcept;

}  // namespace trajprune
