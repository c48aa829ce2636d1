#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "csv.hpp"
#include "trajprune/error.hpp"
#include "trajprune/score_table_io.hpp"

namespace trajprune {

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".json";
  return p;
}

void write_score_table(const ScoreTable& table, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + csv_path.string());
  const bool probs = table.soft_labels.has_value();
  out << "sample_id,label,score";
  if (probs) {
    for (std::uint32_t k = 1; k <= table.n_classes; ++k) out << ",p_" << k;
  }
  out << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.sample_ids[i] << ',' << table.labels[i] << ',' << detail::format_double(table.scores[i]);
    if (probs) {
      for (double p : (*table.soft_labels)[i].probs) out << ',' << detail::format_double(p);
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + csv_path.string());

  nlohmann::json meta = {{"metric", std::string(to_string(table.metric))},
                         {"selector", table.selector.to_string()},
                         {"source_log", table.source_log},
                         {"created", utc_timestamp()},
                         {"n_classes", table.n_classes},
                         {"unit", std::string(score_unit(table.metric))}};
  std::ofstream side(sidecar_path(csv_path), std::ios::trunc);
  side << meta.dump(2) << '\n';
  if (!side) throw Error(ErrorCode::IoFailure, "write failed: " + sidecar_path(csv_path).string());
}

ScoreTable read_score_table(const std::filesystem::path& csv_path) {
  std::ifstream side(sidecar_path(csv_path));
  if (!side) throw Error(ErrorCode::IoFailure, "missing sidecar " + sidecar_path(csv_path).string());
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, sidecar_path(csv_path).string() + ": " + e.what());
  }

  ScoreTable table;
  try {
    table.metric = parse_metric(meta.at("metric").get<std::string>());
    table.selector = EpochSelector::parse(meta.at("selector").get<std::string>());
    table.source_log = meta.value("source_log", std::string{});
    table.n_classes = meta.value("n_classes", 0U);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, sidecar_path(csv_path).string() + ": " + e.what());
  }

  std::ifstream in(csv_path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::FormatError, csv_path.string() + " is empty");
  const auto header = detail::split(detail::trim_cr(line));
  if (header.size() < 3 || header[0] != "sample_id" || header[1] != "label" || header[2] != "score") {
    throw Error(ErrorCode::FormatError, csv_path.string() + ": unexpected header");
  }
  const std::size_t n_probs = header.size() - 3;
  if (n_probs > 0) {
    if (table.n_classes != 0 && n_probs != table.n_classes) {
      throw Error(ErrorCode::FormatError, csv_path.string() + ": probability columns disagree with n_classes");
    }
    table.n_classes = static_cast<std::uint32_t>(n_probs);
    table.soft_labels.emplace();
  }

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto row = detail::trim_cr(line);
    if (row.empty()) continue;
    const auto cells = detail::split(row);
    const std::string ctx = csv_path.string() + ":" + std::to_string(lineno);
    if (cells.size() != header.size()) throw Error(ErrorCode::FormatError, ctx + ": wrong column count");
    table.sample_ids.push_back(detail::parse_number<SampleId>(cells[0], ctx));
    table.labels.push_back(detail::parse_number<ClassId>(cells[1], ctx));
    table.scores.push_back(detail::parse_number<double>(cells[2], ctx));
    if (n_probs > 0) {
      SoftLabel sl;
      sl.probs.reserve(n_probs);
      for (std::size_t k = 0; k < n_probs; ++k) sl.probs.push_back(detail::parse_number<double>(cells[3 + k], ctx));
      table.soft_labels->push_back(std::move(sl));
    }
  }
  return table;
}

}  // namespace trajprune
