#include "trajprune/prune.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "csv.hpp"
#include "trajprune/error.hpp"

namespace trajprune {

std::size_t prune_count(double rate, std::size_t n) {
  const double exact = rate * static_cast<double>(n);
  const double nearest = std::nearbyint(exact);
  const double count = std::abs(exact - nearest) <= 1e-9 * std::max(1.0, exact) ? nearest : std::ceil(exact);
  return std::min(n, static_cast<std::size_t>(std::max(0.0, count)));
}

Ranking rank_samples(const ScoreTable& table) {
  if (table.size() == 0) throw Error(ErrorCode::EmptyTable, "cannot rank an empty score table");
  std::vector<std::size_t> idx(table.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (table.scores[a] != table.scores[b]) return table.scores[a] < table.scores[b];
    return table.sample_ids[a] < table.sample_ids[b];
  });
  Ranking r;
  r.metric = table.metric;
  r.order.reserve(idx.size());
  r.scores.reserve(idx.size());
  for (std::size_t i : idx) {
    r.order.push_back(table.sample_ids[i]);
    r.scores.push_back(table.scores[i]);
  }
  return r;
}

PrunePlan make_prune_plan(const Ranking& ranking, double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error(ErrorCode::RateOutOfRange, "prune rate must lie in [0, 1), got " + detail::format_double(rate));
  }
  const std::size_t k = prune_count(rate, ranking.order.size());
  PrunePlan plan;
  plan.rate = rate;
  plan.removed_ids.assign(ranking.order.begin(), ranking.order.begin() + static_cast<std::ptrdiff_t>(k));
  plan.kept_ids.assign(ranking.order.begin() + static_cast<std::ptrdiff_t>(k), ranking.order.end());
  return plan;
}

void write_prune_plan(const Ranking& ranking, const PrunePlan& plan, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + csv_path.string());
  out << "sample_id,rank,score,removed\n";
  const std::size_t k = plan.removed_ids.size();
  for (std::size_t i = 0; i < ranking.order.size(); ++i) {
    out << ranking.order[i] << ',' << i << ',' << detail::format_double(ranking.scores[i]) << ','
        << (i < k ? 1 : 0) << '\n';
  }
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + csv_path.string());
}

PrunePlan read_prune_plan(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(in, line) || detail::trim_cr(line) != "sample_id,rank,score,removed") {
    throw Error(ErrorCode::FormatError, csv_path.string() + ": not a prune plan");
  }
  PrunePlan plan;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto row = detail::trim_cr(line);
    if (row.empty()) continue;
    const auto cells = detail::split(row);
    const std::string ctx = csv_path.string() + ":" + std::to_string(lineno);
    if (cells.size() != 4) throw Error(ErrorCode::FormatError, ctx + ": wrong column count");
    const auto id = detail::parse_number<SampleId>(cells[0], ctx);
    (detail::parse_number<int>(cells[3], ctx) != 0 ? plan.removed_ids : plan.kept_ids).push_back(id);
  }
  const std::size_t n = plan.removed_ids.size() + plan.kept_ids.size();
  plan.rate = n == 0 ? 0.0 : static_cast<double>(plan.removed_ids.size()) / static_cast<double>(n);
  return plan;
}

}  // namespace trajprune
