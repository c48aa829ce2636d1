#pragma once

#include <filesystem>

#include "trajprune/metrics.hpp"

namespace trajprune {

/// CSV `sample_id,label,score[,p_1..p_c]` plus a JSON sidecar at
/// `<path>.json` holding {metric, selector, source_log, created, n_classes, unit}.
void write_score_table(const ScoreTable& table, const std::filesystem::path& csv_path);

ScoreTable read_score_table(const std::filesystem::path& csv_path);

std::filesystem::path sidecar_path(const std::filesystem::path& path);

}  // namespace trajprune
