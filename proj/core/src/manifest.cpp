#include "trajprune/manifest.hpp"

#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "trajprune/error.hpp"

namespace trajprune {

namespace {

template <typename Ids>
void require_known(const Manifest& manifest, const Ids& ids) {
  std::unordered_set<SampleId> known;
  known.reserve(manifest.size());
  for (const auto& e : manifest) known.insert(e.sample_id);
  for (SampleId id : ids) {
    if (!known.contains(id)) throw Error(ErrorCode::UnknownSampleId, "plan names sample " + std::to_string(id));
  }
}

}  // namespace

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  Manifest out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ManifestEntry e;
      e.sample_id = j.at("sample_id").get<SampleId>();
      e.label = j.at("label").get<ClassId>();
      e.payload_ref = j.at("payload_ref").get<std::string>();
      e.corrected = j.value("corrected", false);
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::FormatError, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
  for (const auto& e : manifest) {
    nlohmann::ordered_json j;
    j["sample_id"] = e.sample_id;
    j["label"] = e.label;
    j["payload_ref"] = e.payload_ref;
    if (e.corrected) j["corrected"] = true;
    out << j.dump() << '\n';
  }
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

Manifest apply_plan(const Manifest& manifest, const PrunePlan& plan) {
  require_known(manifest, plan.removed_ids);
  require_known(manifest, plan.kept_ids);
  const std::unordered_set<SampleId> removed(plan.removed_ids.begin(), plan.removed_ids.end());
  Manifest out;
  out.reserve(manifest.size() - std::min(manifest.size(), removed.size()));
  for (const auto& e : manifest) {
    if (!removed.contains(e.sample_id)) out.push_back(e);
  }
  return out;
}

Manifest apply_plan(const Manifest& manifest, const PurificationPlan& plan) {
  std::unordered_map<SampleId, const PlanEntry*> verdicts;
  verdicts.reserve(plan.entries.size());
  for (const auto& e : plan.entries) verdicts.emplace(e.sample_id, &e);
  std::vector<SampleId> ids;
  ids.reserve(plan.entries.size());
  for (const auto& e : plan.entries) ids.push_back(e.sample_id);
  require_known(manifest, ids);

  Manifest out;
  out.reserve(manifest.size());
  for (const auto& e : manifest) {
    const auto it = verdicts.find(e.sample_id);
    if (it == verdicts.end()) {
      out.push_back(e);
      continue;
    }
    switch (it->second->verdict) {
      case Verdict::Keep: out.push_back(e); break;
      case Verdict::Relabel: {
        ManifestEntry fixed = e;
        fixed.label = it->second->new_label;
        fixed.corrected = true;
        out.push_back(std::move(fixed));
        break;
      }
      case Verdict::RemoveOutlier:
      case Verdict::PruneEasy: break;
    }
  }
  return out;
}

}  // namespace trajprune
