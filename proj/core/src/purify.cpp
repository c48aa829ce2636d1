#include "trajprune/purify.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "csv.hpp"
#include "trajprune/error.hpp"
#include "trajprune/prune.hpp"

namespace trajprune {

namespace {

void require_soft_labels(const ScoreTable& table) {
  if (!table.soft_labels || table.soft_labels->size() != table.size()) {
    throw Error(ErrorCode::MissingSoftLabels,
                "score table (" + std::string(to_string(table.metric)) + ") carries no soft labels");
  }
}

// Position of each log sample inside the table.
std::vector<std::size_t> align(const TrajectoryLog& log, const ScoreTable& table) {
  std::unordered_map<SampleId, std::size_t> index;
  index.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) index.emplace(table.sample_ids[i], i);
  if (index.size() != log.n_samples() || table.size() != log.n_samples()) {
    throw Error(ErrorCode::SampleSetMismatch, "score table and log cover different samples");
  }
  std::vector<std::size_t> pos(log.n_samples());
  for (std::size_t i = 0; i < log.n_samples(); ++i) {
    const auto it = index.find(log.sample_ids[i]);
    if (it == index.end()) {
      throw Error(ErrorCode::SampleSetMismatch, "sample " + std::to_string(log.sample_ids[i]) + " missing from table");
    }
    pos[i] = it->second;
  }
  return pos;
}

nlohmann::json config_json(const PurifyConfig& cfg) {
  return {{"delta", cfg.delta},
          {"prune_rate", cfg.prune_rate},
          {"enable_correction", cfg.enable_correction},
          {"enable_outlier_removal", cfg.enable_outlier_removal}};
}

}  // namespace

void PurifyConfig::check() const {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "delta must lie in (0, 1), got " + detail::format_double(delta));
  }
  if (!(prune_rate >= 0.0 && prune_rate < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "prune_rate must lie in [0, 1), got " + detail::format_double(prune_rate));
  }
}

std::vector<LabelCorrection> correct_labels(const TrajectoryLog& log, const ScoreTable& table) {
  require_soft_labels(table);
  const auto pos = align(log, table);
  std::vector<LabelCorrection> out;
  for (std::size_t i = 0; i < log.n_samples(); ++i) {
    const ClassId predicted = (*table.soft_labels)[pos[i]].argmax();
    if (predicted != log.labels[i]) out.push_back({log.sample_ids[i], log.labels[i], predicted});
  }
  return out;
}

std::vector<SampleId> detect_outliers(const ScoreTable& table, double delta) {
  require_soft_labels(table);
  std::vector<SampleId> out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if ((*table.soft_labels)[i].max_prob() <= delta) out.push_back(table.sample_ids[i]);
  }
  return out;
}

std::string_view to_string(Verdict verdict) noexcept {
  switch (verdict) {
    case Verdict::Keep: return "keep";
    case Verdict::Relabel: return "relabel";
    case Verdict::RemoveOutlier: return "remove_outlier";
    case Verdict::PruneEasy: return "prune_easy";
  }
  return "unknown";
}

Verdict parse_verdict(std::string_view text) {
  if (text == "keep") return Verdict::Keep;
  if (text == "relabel") return Verdict::Relabel;
  if (text == "remove_outlier") return Verdict::RemoveOutlier;
  if (text == "prune_easy") return Verdict::PruneEasy;
  throw Error(ErrorCode::FormatError, "unknown verdict '" + std::string(text) + "'");
}

PurificationPlan purify_pipeline(const TrajectoryLog& log, const ScoreTable& table, const PurifyConfig& cfg) {
  cfg.check();
  if (table.metric != Metric::Entropy) {
    throw Error(ErrorCode::MetricMismatch, "purification needs an entropy table, got " +
                                               std::string(to_string(table.metric)));
  }
  require_soft_labels(table);
  const auto pos = align(log, table);
  const std::size_t n = log.n_samples();

  PurificationPlan plan;
  plan.config = cfg;
  plan.source_metric = table.metric;
  plan.source_selector = table.selector;
  plan.budget = prune_count(cfg.prune_rate, n);
  plan.entries.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SoftLabel& sl = (*table.soft_labels)[pos[i]];
    auto& e = plan.entries[i];
    e.sample_id = log.sample_ids[i];
    e.old_label = e.new_label = log.labels[i];
    e.entropy = table.scores[pos[i]];
    e.max_prob = sl.max_prob();
  }

  // 1) outliers
  if (cfg.enable_outlier_removal) {
    for (auto& e : plan.entries) {
      if (e.max_prob <= cfg.delta) {
        e.verdict = Verdict::RemoveOutlier;
        ++plan.n_outliers;
      }
    }
  }

  // 2) label correction on what survived
  if (cfg.enable_correction) {
    for (std::size_t i = 0; i < n; ++i) {
      auto& e = plan.entries[i];
      if (e.verdict != Verdict::Keep) continue;
      const ClassId predicted = (*table.soft_labels)[pos[i]].argmax();
      if (predicted != e.old_label) {
        e.verdict = Verdict::Relabel;
        e.new_label = predicted;
      }
    }
  }

  // 3) easy samples, lowest entropy first; corrected samples stay eligible
  const std::size_t easy_budget = plan.budget > plan.n_outliers ? plan.budget - plan.n_outliers : 0;
  std::vector<std::size_t> candidates;
  candidates.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (plan.entries[i].verdict != Verdict::RemoveOutlier) candidates.push_back(i);
  }
  const std::size_t take = std::min(easy_budget, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(),
                    [&](std::size_t a, std::size_t b) {
                      const auto& ea = plan.entries[a];
                      const auto& eb = plan.entries[b];
                      if (ea.entropy != eb.entropy) return ea.entropy < eb.entropy;
                      return ea.sample_id < eb.sample_id;
                    });
  for (std::size_t k = 0; k < take; ++k) {
    auto& e = plan.entries[candidates[k]];
    e.verdict = Verdict::PruneEasy;
    e.new_label = e.old_label;
  }
  plan.n_pruned_easy = take;
  plan.n_corrected = static_cast<std::size_t>(std::count_if(
      plan.entries.begin(), plan.entries.end(), [](const PlanEntry& e) { return e.verdict == Verdict::Relabel; }));
  return plan;
}

void write_purification_plan(const PurificationPlan& plan, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + csv_path.string());
  out << "sample_id,verdict,old_label,new_label,entropy,max_prob\n";
  for (const auto& e : plan.entries) {
    out << e.sample_id << ',' << to_string(e.verdict) << ',' << e.old_label << ',' << e.new_label << ','
        << detail::format_double(e.entropy) << ',' << detail::format_double(e.max_prob) << '\n';
  }
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + csv_path.string());

  nlohmann::json summary = {
      {"n_samples", plan.entries.size()},
      {"n_outliers", plan.n_outliers},
      {"n_corrected", plan.n_corrected},
      {"n_pruned_easy", plan.n_pruned_easy},
      {"n_removed", plan.n_removed()},
      {"budget", plan.budget},
      {"config", config_json(plan.config)},
      {"source_metric", std::string(to_string(plan.source_metric))},
      {"source_selector", plan.source_selector.to_string()},
  };
  auto side = csv_path;
  side += ".json";
  std::ofstream js(side, std::ios::trunc);
  js << summary.dump(2) << '\n';
  if (!js) throw Error(ErrorCode::IoFailure, "write failed: " + side.string());
}

PurificationPlan read_purification_plan(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(in, line) || detail::trim_cr(line) != "sample_id,verdict,old_label,new_label,entropy,max_prob") {
    throw Error(ErrorCode::FormatError, csv_path.string() + ": not a purification plan");
  }
  PurificationPlan plan;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto row = detail::trim_cr(line);
    if (row.empty()) continue;
    const auto cells = detail::split(row);
    const std::string ctx = csv_path.string() + ":" + std::to_string(lineno);
    if (cells.size() != 6) throw Error(ErrorCode::FormatError, ctx + ": wrong column count");
    PlanEntry e;
    e.sample_id = detail::parse_number<SampleId>(cells[0], ctx);
    e.verdict = parse_verdict(cells[1]);
    e.old_label = detail::parse_number<ClassId>(cells[2], ctx);
    e.new_label = detail::parse_number<ClassId>(cells[3], ctx);
    e.entropy = detail::parse_number<double>(cells[4], ctx);
    e.max_prob = detail::parse_number<double>(cells[5], ctx);
    switch (e.verdict) {
      case Verdict::RemoveOutlier: ++plan.n_outliers; break;
      case Verdict::Relabel: ++plan.n_corrected; break;
      case Verdict::PruneEasy: ++plan.n_pruned_easy; break;
      case Verdict::Keep: break;
    }
    plan.entries.push_back(e);
  }

  auto side = csv_path;
  side += ".json";
  if (std::ifstream js(side); js) {
    try {
      nlohmann::json summary;
      js >> summary;
      plan.budget = summary.value("budget", plan.n_removed());
      const auto& c = summary.at("config");
      plan.config.delta = c.value("delta", kDefaultOutlierDelta);
      plan.config.prune_rate = c.value("prune_rate", 0.0);
      plan.config.enable_correction = c.value("enable_correction", true);
      plan.config.enable_outlier_removal = c.value("enable_outlier_removal", true);
      plan.source_metric = parse_metric(summary.value("source_metric", std::string("entropy")));
      plan.source_selector = EpochSelector::parse(summary.value("source_selector", std::string("every_k:1")));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::FormatError, side.string() + ": " + e.what());
    }
  } else {
    plan.budget = plan.n_removed();
  }
  return plan;
}

}  // namespace trajprune
