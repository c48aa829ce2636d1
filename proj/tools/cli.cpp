#include "cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>

#include "run_manifest.hpp"
#include "trajprune/compare.hpp"
#include "trajprune/error.hpp"
#include "trajprune/log_io.hpp"
#include "trajprune/manifest.hpp"
#include "trajprune/metrics.hpp"
#include "trajprune/prune.hpp"
#include "trajprune/purify.hpp"
#include "trajprune/rng.hpp"
#include "trajprune/score_table_io.hpp"
#include "trajprune/synthetic.hpp"
#include "trajprune/trainer.hpp"

namespace fs = std::filesystem;

namespace trajprune::cli {

namespace {

constexpr std::uint64_t kNoiseStream = 0x4E4F4953;  // "NOIS"

/// Flag validation failure; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out += suffix;
  return out;
}

// Shortest round-trip representation.
std::string fmt(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_rates(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || !(v >= 0.0 && v < 1.0)) {
      throw UsageError(flag + ": '" + item + "' is not a rate in [0, 1)");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(flag + " needs at least one value");
  return out;
}

unsigned thread_cap() {
  if (const char* env = std::getenv("TRAJPRUNE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 0;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::SelectorOutOfRange:
    case ErrorCode::EpochOutOfRange:
    case ErrorCode::MetricMismatch:
    case ErrorCode::MetricSelectorMismatch:
    case ErrorCode::MissingSoftLabels:
    case ErrorCode::RateOutOfRange:
    case ErrorCode::RatioOutOfRange:
    case ErrorCode::EmptyTable:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

// ---- synth -----------------------------------------------------------------

struct SynthOpts {
  std::uint32_t classes = 3;
  std::uint32_t dim = 2;
  std::uint32_t per_class = 200;
  double sigma = 1.0;
  double sep = 10.0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  double duplicates = 0.0;
  double dup_jitter = 0.05;
  std::string out;
};

int cmd_synth(const SynthOpts& o, std::ostream& out) {
  if (!(o.noise >= 0.0 && o.noise < 1.0)) throw UsageError("--noise must lie in [0, 1), got " + fmt(o.noise));
  if (!(o.sigma > 0.0)) throw UsageError("--sigma must be positive, got " + fmt(o.sigma));
  if (!(o.sep > 0.0)) throw UsageError("--sep must be positive, got " + fmt(o.sep));
  if (o.classes < 1 || o.dim < 1 || o.per_class < 1) throw UsageError("--classes, --dim and --per-class must be >= 1");
  if (!(o.duplicates >= 0.0 && o.duplicates < 1.0)) throw UsageError("--duplicates must lie in [0, 1)");
  if (!(o.dup_jitter >= 0.0)) throw UsageError("--dup-jitter must be >= 0");

  SyntheticSpec spec;
  spec.n_classes = o.classes;
  spec.dim = o.dim;
  spec.n_per_class = o.per_class;
  spec.sigma = o.sigma;
  spec.seed = o.seed;
  spec.class_means = separated_means(o.classes, o.dim, o.sep, o.sigma);
  spec.duplicate_fraction = o.duplicates;
  spec.duplicate_jitter = o.dup_jitter * o.sigma;

  const SyntheticDataset clean = synth_dataset(spec);
  auto [noisy, flips] = inject_label_noise(clean, o.noise, derive_seed(o.seed, kNoiseStream));

  const fs::path manifest = with_suffix(o.out, ".manifest.jsonl");
  const fs::path features = with_suffix(o.out, ".features.bin");
  const fs::path flip_file = with_suffix(o.out, ".flips.csv");
  write_dataset(noisy, manifest, features);
  write_flip_record(flips, flip_file);

  RunManifest rm("synth");
  rm.set_config({{"classes", o.classes},
                 {"dim", o.dim},
                 {"per_class", o.per_class},
                 {"sigma", o.sigma},
                 {"sep", o.sep},
                 {"noise", o.noise},
                 {"seed", o.seed},
                 {"duplicates", o.duplicates},
                 {"dup_jitter", o.dup_jitter}});
  rm.add_output(manifest);
  rm.add_output(features);
  rm.add_output(flip_file);
  rm.write(with_suffix(o.out, ".run.json"));

  out << "wrote " << noisy.size() << " samples (" << flips.size() << " flipped) to " << manifest.string() << '\n';
  return kExitOk;
}

// ---- train -----------------------------------------------------------------

struct TrainOpts {
  std::string data;
  std::uint32_t classes = 0;
  std::int64_t epochs = 12;
  std::int64_t batch = 32;
  double lr = 0.1;
  double init_scale = 0.01;
  std::uint64_t seed = 0;
  std::string format = "binary";
  std::string out;
};

TrainConfig to_train_config(std::int64_t epochs, std::int64_t batch, double lr, double init_scale,
                            std::uint64_t seed) {
  if (epochs < 1) throw UsageError("--epochs must be >= 1, got " + std::to_string(epochs));
  if (batch < 1) throw UsageError("--batch must be >= 1, got " + std::to_string(batch));
  if (!(lr > 0.0)) throw UsageError("--lr must be positive, got " + fmt(lr));
  if (!(init_scale >= 0.0)) throw UsageError("--init-scale must be >= 0");
  TrainConfig cfg;
  cfg.epochs = static_cast<std::uint32_t>(epochs);
  cfg.batch_size = static_cast<std::uint32_t>(batch);
  cfg.learning_rate = lr;
  cfg.weight_init_scale = init_scale;
  cfg.seed = seed;
  return cfg;
}

SyntheticDataset load_dataset(const std::string& path, std::uint32_t classes) {
  SyntheticDataset ds = read_dataset(path);
  if (classes != 0) {
    if (classes < ds.n_classes) throw UsageError("--classes is smaller than the largest label + 1");
    ds.n_classes = classes;
  }
  return ds;
}

int cmd_train(const TrainOpts& o, std::ostream& out, std::ostream& err) {
  const TrainConfig cfg = to_train_config(o.epochs, o.batch, o.lr, o.init_scale, o.seed);
  const LogFormat format = o.format == "jsonl" ? LogFormat::Jsonl : LogFormat::Binary;
  const SyntheticDataset ds = load_dataset(o.data, o.classes);
  TrajectoryLog log;
  try {
    log = train_softmax(ds, cfg);
  } catch (const DivergenceError& e) {
    if (e.partial_log().n_epochs > 0) {
      write_log(e.partial_log(), with_suffix(o.out, ".partial"), format);
      err << "partial log (" << e.partial_log().n_epochs << " epochs) written to " << o.out << ".partial\n";
    }
    throw;
  }
  write_log(log, o.out, format);

  RunManifest rm("train");
  rm.set_config({{"epochs", cfg.epochs},
                 {"batch", cfg.batch_size},
                 {"lr", cfg.learning_rate},
                 {"init_scale", cfg.weight_init_scale},
                 {"seed", cfg.seed},
                 {"classes", ds.n_classes},
                 {"format", o.format}});
  rm.add_input(o.data);
  rm.add_output(o.out);
  rm.write(with_suffix(o.out, ".run.json"));
  out << "trained " << cfg.epochs << " epochs on " << ds.size() << " samples; log at " << o.out << '\n';
  return kExitOk;
}

// ---- score -----------------------------------------------------------------

struct ScoreOpts {
  std::string log;
  std::string ensemble;
  std::string metric = "entropy";
  std::optional<std::uint32_t> every_k;
  std::optional<std::uint32_t> at_epoch;
  std::optional<std::uint32_t> upto;
  std::string out;
};

EpochSelector selector_for(Metric metric, const ScoreOpts& o, std::uint32_t n_epochs) {
  if (o.at_epoch) {
    if (metric == Metric::Forgetting) {
      throw UsageError("--at-epoch cannot be used with --metric forgetting (it needs an epoch sequence)");
    }
    return EpochSelector::single(*o.at_epoch);
  }
  if (metric == Metric::El2n) {
    if (o.every_k || o.upto) throw UsageError("--metric el2n takes --at-epoch, not --every-k/--upto");
    return EpochSelector::single(n_epochs);
  }
  if (o.every_k) return EpochSelector::every_k(*o.every_k);
  if (o.upto) return EpochSelector::upto(*o.upto);
  return EpochSelector::every_k(1);
}

int cmd_score(const ScoreOpts& o, std::ostream& out) {
  const Metric metric = [&] {
    try {
      return parse_metric(o.metric);
    } catch (const Error&) {
      throw UsageError("--metric: unknown metric '" + o.metric + "'");
    }
  }();
  std::vector<std::string> paths = o.ensemble.empty() ? std::vector<std::string>{} : split_list(o.ensemble);
  if (!o.log.empty()) paths.insert(paths.begin(), o.log);
  if (paths.empty()) throw UsageError("one of --log or --ensemble is required");

  std::vector<ScoreTable> tables;
  RunManifest rm("score");
  std::optional<EpochSelector> sel;
  for (const auto& p : paths) {
    if (!fs::exists(p)) throw UsageError("input log not found: " + p);
    const TrajectoryLog log = open_log(p);
    if (!sel) sel = selector_for(metric, o, log.n_epochs);
    ScoreTable t = score_dataset(log, metric, *sel);
    t.source_log = p;
    tables.push_back(std::move(t));
    rm.add_input(p);
  }
  const ScoreTable table = ensemble_average(tables);
  write_score_table(table, o.out);

  rm.set_config({{"metric", std::string(to_string(metric))},
                 {"selector", sel->to_string()},
                 {"n_logs", paths.size()}});
  rm.add_output(o.out);
  rm.write(with_suffix(o.out, ".run.json"));
  out << "scored " << table.size() << " samples with " << to_string(metric) << " (" << sel->to_string() << ", "
      << paths.size() << " log" << (paths.size() == 1 ? "" : "s") << ") -> " << o.out << '\n';
  return kExitOk;
}

// ---- purify ----------------------------------------------------------------

struct PurifyOpts {
  std::string log;
  std::string scores;
  double delta = kDefaultOutlierDelta;
  double prune_rate = 0.0;
  bool no_correct = false;
  bool no_outliers = false;
  std::string manifest;
  std::string manifest_out;
  std::string out;
};

int cmd_purify(const PurifyOpts& o, std::ostream& out) {
  if (!(o.delta > 0.0 && o.delta < 1.0)) throw UsageError("--delta must lie in (0, 1), got " + fmt(o.delta));
  if (!(o.prune_rate >= 0.0 && o.prune_rate < 1.0)) {
    throw UsageError("--prune-rate must lie in [0, 1), got " + fmt(o.prune_rate));
  }
  const ScoreTable table = read_score_table(o.scores);
  if (table.metric != Metric::Entropy || !table.soft_labels) {
    throw UsageError("--scores must be an entropy table with soft-label columns (got " +
                     std::string(to_string(table.metric)) + ")");
  }
  const TrajectoryLog log = open_log(o.log);

  PurifyConfig cfg;
  cfg.delta = o.delta;
  cfg.prune_rate = o.prune_rate;
  cfg.enable_correction = !o.no_correct;
  cfg.enable_outlier_removal = !o.no_outliers;
  const PurificationPlan plan = purify_pipeline(log, table, cfg);
  write_purification_plan(plan, o.out);

  RunManifest rm("purify");
  rm.set_config({{"delta", cfg.delta},
                 {"prune_rate", cfg.prune_rate},
                 {"correction", cfg.enable_correction},
                 {"outlier_removal", cfg.enable_outlier_removal}});
  rm.add_input(o.log);
  rm.add_input(o.scores);
  rm.add_output(o.out);
  rm.add_output(with_suffix(o.out, ".json"));
  if (!o.manifest.empty()) {
    if (o.manifest_out.empty()) throw UsageError("--manifest needs --manifest-out");
    write_manifest(apply_plan(read_manifest(o.manifest), plan), o.manifest_out);
    rm.add_input(o.manifest);
    rm.add_output(o.manifest_out);
  }
  rm.write(with_suffix(o.out, ".run.json"));

  out << "outliers " << plan.n_outliers << ", corrected " << plan.n_corrected << ", pruned easy "
      << plan.n_pruned_easy << " (removed " << plan.n_removed() << " of budget " << plan.budget << ") -> " << o.out
      << '\n';
  return kExitOk;
}

// ---- prune / apply ---------------------------------------------------------

struct PruneOpts {
  std::string scores;
  double rate = 0.1;
  std::string manifest;
  std::string manifest_out;
  std::string out;
};

int cmd_prune(const PruneOpts& o, std::ostream& out) {
  if (!(o.rate >= 0.0 && o.rate < 1.0)) throw UsageError("--rate must lie in [0, 1), got " + fmt(o.rate));
  const ScoreTable table = read_score_table(o.scores);
  const Ranking ranking = rank_samples(table);
  const PrunePlan plan = make_prune_plan(ranking, o.rate);
  write_prune_plan(ranking, plan, o.out);

  RunManifest rm("prune");
  rm.set_config({{"rate", o.rate}, {"metric", std::string(to_string(table.metric))}});
  rm.add_input(o.scores);
  rm.add_output(o.out);
  if (!o.manifest.empty()) {
    if (o.manifest_out.empty()) throw UsageError("--manifest needs --manifest-out");
    write_manifest(apply_plan(read_manifest(o.manifest), plan), o.manifest_out);
    rm.add_input(o.manifest);
    rm.add_output(o.manifest_out);
  }
  rm.write(with_suffix(o.out, ".run.json"));
  out << "removed " << plan.removed_ids.size() << " of " << ranking.order.size() << " samples -> " << o.out << '\n';
  return kExitOk;
}

struct ApplyOpts {
  std::string manifest;
  std::string plan;
  std::string out;
};

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

int cmd_apply(const ApplyOpts& o, std::ostream& out) {
  const Manifest manifest = read_manifest(o.manifest);
  const std::string header = first_line(o.plan);
  Manifest result;
  if (header.rfind("sample_id,verdict", 0) == 0) {
    result = apply_plan(manifest, read_purification_plan(o.plan));
  } else if (header.rfind("sample_id,rank", 0) == 0) {
    result = apply_plan(manifest, read_prune_plan(o.plan));
  } else {
    throw UsageError("--plan is neither a purification plan nor a prune plan");
  }
  write_manifest(result, o.out);
  RunManifest rm("apply");
  rm.add_input(o.manifest);
  rm.add_input(o.plan);
  rm.add_output(o.out);
  rm.write(with_suffix(o.out, ".run.json"));
  out << "kept " << result.size() << " of " << manifest.size() << " entries -> " << o.out << '\n';
  return kExitOk;
}

// ---- compare ---------------------------------------------------------------

struct CompareOpts {
  std::string data;
  std::string heldout;
  std::string log;
  std::string metrics = "entropy,random";
  std::string rates = "0,0.1,0.2,0.3,0.4,0.5";
  std::int64_t seeds = 4;
  std::int64_t epochs = 12;
  std::int64_t batch = 32;
  double lr = 0.1;
  double init_scale = 0.01;
  std::uint64_t seed = 0;
  std::int64_t score_epochs = 12;
  std::optional<double> score_lr;
  std::uint32_t el2n_epoch = 0;
  std::uint32_t classes = 0;
  std::string out;
};

int cmd_compare(const CompareOpts& o, std::ostream& out) {
  CompareConfig cfg;
  cfg.metrics = split_list(o.metrics);
  for (const auto& m : cfg.metrics) {
    if (m == "random") continue;
    try {
      (void)parse_metric(m);
    } catch (const Error&) {
      throw UsageError("--metrics: unknown metric '" + m + "'");
    }
  }
  if (cfg.metrics.empty()) throw UsageError("--metrics needs at least one entry");
  cfg.rates = parse_rates(o.rates, "--rates");
  if (o.seeds < 1) throw UsageError("--seeds must be >= 1");
  cfg.n_seeds = static_cast<std::size_t>(o.seeds);
  cfg.train = to_train_config(o.epochs, o.batch, o.lr, o.init_scale, o.seed);
  cfg.el2n_epoch = o.el2n_epoch;
  cfg.threads = thread_cap();

  SyntheticDataset train = load_dataset(o.data, o.classes);
  SyntheticDataset heldout = load_dataset(o.heldout, o.classes);
  const std::uint32_t classes = std::max(train.n_classes, heldout.n_classes);
  train.n_classes = heldout.n_classes = classes;

  RunManifest rm("compare");
  rm.add_input(o.data);
  rm.add_input(o.heldout);
  TrajectoryLog log;
  if (!o.log.empty()) {
    log = open_log(o.log);
    rm.add_input(o.log);
  } else {
    const TrainConfig score_cfg =
        to_train_config(o.score_epochs, o.batch, o.score_lr.value_or(o.lr), o.init_scale, o.seed);
    log = train_softmax(train, score_cfg);
  }

  const auto rows = compare_pruning(train, heldout, log, cfg);
  std::ofstream csv(o.out, std::ios::trunc);
  if (!csv) throw Error(ErrorCode::IoFailure, "cannot create " + o.out);
  csv << "rate,metric,mean,std,n\n";
  for (const auto& r : rows) csv << fmt(r.rate) << ',' << r.metric << ',' << fmt(r.mean) << ',' << fmt(r.std) << ',' << r.n << '\n';
  csv.close();
  if (!csv) throw Error(ErrorCode::IoFailure, "write failed: " + o.out);

  rm.set_config({{"metrics", o.metrics},
                 {"rates", o.rates},
                 {"seeds", cfg.n_seeds},
                 {"epochs", cfg.train.epochs},
                 {"batch", cfg.train.batch_size},
                 {"lr", cfg.train.learning_rate},
                 {"seed", cfg.train.seed},
                 {"el2n_epoch", cfg.el2n_epoch}});
  rm.add_output(o.out);
  rm.write(with_suffix(o.out, ".run.json"));
  out << rows.size() << " rows (" << cfg.n_seeds << " seeds per cell) -> " << o.out << '\n';
  return kExitOk;
}

// ---- report ----------------------------------------------------------------

struct ReportOpts {
  std::string plan;
  std::string scores;
  std::string manifest;
  std::size_t top = 10;
  std::string out;
};

int cmd_report(const ReportOpts& o, std::ostream& out) {
  if (o.plan.empty() && o.scores.empty()) throw UsageError("report needs --plan and/or --scores");
  for (const auto& p : {o.plan, o.scores, o.manifest}) {
    if (!p.empty() && !fs::exists(p)) throw UsageError("input not found: " + p);
  }

  std::unordered_map<SampleId, std::string> refs;
  if (!o.manifest.empty()) {
    for (const auto& e : read_manifest(o.manifest)) refs.emplace(e.sample_id, e.payload_ref);
  }
  auto ref_of = [&](SampleId id) {
    const auto it = refs.find(id);
    return it == refs.end() ? std::string("-") : it->second;
  };

  std::ostringstream text;
  std::ostringstream csv;
  csv << "section,sample_id,value,old_label,new_label,payload_ref\n";

  // Hardest samples: score table when given, else plan entropy.
  struct Hard {
    SampleId id;
    double score;
  };
  std::vector<Hard> hard;
  std::string hard_source;

  if (!o.plan.empty()) {
    const PurificationPlan plan = read_purification_plan(o.plan);
    const bool acted = plan.n_outliers + plan.n_corrected + plan.n_pruned_easy > 0;
    text << "plan: " << o.plan << '\n'
         << "samples " << plan.entries.size() << ", outliers " << plan.n_outliers << ", corrected "
         << plan.n_corrected << ", pruned easy " << plan.n_pruned_easy << ", removed " << plan.n_removed() << '\n';
    if (!acted) {
      text << "no actions\n";
    } else {
      text << "\ncorrections (" << plan.n_corrected << ")\n";
      for (const auto& e : plan.entries) {
        if (e.verdict != Verdict::Relabel) continue;
        text << "  " << e.sample_id << ": " << e.old_label << " -> " << e.new_label << '\n';
        csv << "correction," << e.sample_id << ',' << fmt(e.max_prob) << ',' << e.old_label << ',' << e.new_label
            << ',' << ref_of(e.sample_id) << '\n';
      }
      text << "\noutliers (" << plan.n_outliers << ")\n";
      for (const auto& e : plan.entries) {
        if (e.verdict != Verdict::RemoveOutlier) continue;
        text << "  " << e.sample_id << "  max_prob " << fmt(e.max_prob) << "  " << ref_of(e.sample_id) << '\n';
        csv << "outlier," << e.sample_id << ',' << fmt(e.max_prob) << ',' << e.old_label << ',' << e.new_label << ','
            << ref_of(e.sample_id) << '\n';
      }
    }
    if (o.scores.empty()) {
      hard_source = "entropy (plan)";
      for (const auto& e : plan.entries) hard.push_back({e.sample_id, e.entropy});
    }
  }

  Metric hard_metric = Metric::Entropy;
  if (!o.scores.empty()) {
    const ScoreTable table = read_score_table(o.scores);
    hard_metric = table.metric;
    hard_source = std::string(to_string(table.metric)) + " (" + o.scores + ")";
    for (std::size_t i = 0; i < table.size(); ++i) hard.push_back({table.sample_ids[i], table.scores[i]});
  }

  if (!hard.empty()) {
    // AUM is a margin: the hardest samples have the smallest values.
    const bool ascending = hard_metric == Metric::Aum;
    std::sort(hard.begin(), hard.end(), [&](const Hard& a, const Hard& b) {
      if (a.score != b.score) return ascending ? a.score < b.score : a.score > b.score;
      return a.id < b.id;
    });
    const std::size_t k = std::min(o.top, hard.size());
    text << "\ntop " << k << " hardest by " << hard_source << '\n';
    for (std::size_t i = 0; i < k; ++i) {
      text << "  " << std::setw(3) << i + 1 << ". " << hard[i].id << "  " << fmt(hard[i].score) << '\n';
      csv << "hardest," << hard[i].id << ',' << fmt(hard[i].score) << ",,," << ref_of(hard[i].id) << '\n';
    }
  }

  if (o.out.empty()) {
    out << text.str();
  } else {
    std::ofstream f(o.out, std::ios::trunc);
    f << text.str();
    std::ofstream c(with_suffix(o.out, ".csv"), std::ios::trunc);
    c << csv.str();
    if (!f || !c) throw Error(ErrorCode::IoFailure, "write failed: " + o.out);
    RunManifest rm("report");
    if (!o.plan.empty()) rm.add_input(o.plan);
    if (!o.scores.empty()) rm.add_input(o.scores);
    rm.add_output(o.out);
    rm.add_output(with_suffix(o.out, ".csv"));
    rm.write(with_suffix(o.out, ".run.json"));
    out << "report -> " << o.out << '\n';
  }
  return kExitOk;
}

// ---- validate --------------------------------------------------------------

int cmd_validate(const std::string& path, std::ostream& out) {
  const TrajectoryLog log = open_log(path);
  const ValidationReport report = validate(log);
  out << path << ": n=" << log.n_samples() << " c=" << log.n_classes << " T=" << log.n_epochs << " -> "
      << (report.ok ? "ok" : "invalid") << '\n';
  for (const auto& issue : report.issues) out << "  " << to_string(issue.code) << ": " << issue.message << '\n';
  return report.ok ? kExitOk : kExitRuntime;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"trajprune: dataset curation from logit trajectories"};
  app.require_subcommand(1);
  app.set_version_flag("--version", TRAJPRUNE_VERSION);

  SynthOpts synth;
  auto* s = app.add_subcommand("synth", "Generate a seeded Gaussian-mixture dataset");
  s->add_option("--classes", synth.classes, "Number of classes")->capture_default_str();
  s->add_option("--dim", synth.dim, "Feature dimension")->capture_default_str();
  s->add_option("--per-class", synth.per_class, "Samples per class")->capture_default_str();
  s->add_option("--sigma", synth.sigma, "Isotropic standard deviation")->capture_default_str();
  s->add_option("--sep", synth.sep, "Minimum class-mean distance in units of sigma")->capture_default_str();
  s->add_option("--noise", synth.noise, "Fraction of labels to flip, in [0, 1)")->capture_default_str();
  s->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  s->add_option("--duplicates", synth.duplicates, "Fraction of each class planted near its mean")->capture_default_str();
  s->add_option("--dup-jitter", synth.dup_jitter, "Near-duplicate spread in units of sigma")->capture_default_str();
  s->add_option("--out", synth.out, "Output prefix")->required();

  TrainOpts train;
  auto* t = app.add_subcommand("train", "Train the reference softmax model and log per-epoch logits");
  t->add_option("--data", train.data, "Dataset manifest (JSONL)")->required()->check(CLI::ExistingFile);
  t->add_option("--classes", train.classes, "Override the class count inferred from labels");
  t->add_option("--epochs", train.epochs, "Training epochs")->capture_default_str();
  t->add_option("--batch", train.batch, "Mini-batch size")->capture_default_str();
  t->add_option("--lr", train.lr, "Learning rate")->capture_default_str();
  t->add_option("--init-scale", train.init_scale, "Weight init standard deviation")->capture_default_str();
  t->add_option("--seed", train.seed, "Training seed")->capture_default_str();
  t->add_option("--format", train.format, "Log encoding")->check(CLI::IsMember({"binary", "jsonl"}))->capture_default_str();
  t->add_option("--out", train.out, "Output trajectory log")->required();

  ScoreOpts score;
  auto* sc = app.add_subcommand("score", "Compute per-sample importance scores");
  sc->add_option("--log", score.log, "Trajectory log");
  sc->add_option("--ensemble", score.ensemble, "Comma-separated logs whose scores are averaged");
  sc->add_option("--metric", score.metric, "entropy|aum|forgetting|el2n|mal")->capture_default_str();
  auto* every = sc->add_option("--every-k", score.every_k, "Use epochs k, 2k, ...");
  auto* at = sc->add_option("--at-epoch", score.at_epoch, "Use a single epoch");
  auto* upto = sc->add_option("--upto", score.upto, "Use epochs 1..T");
  every->excludes(at)->excludes(upto);
  at->excludes(upto);
  sc->add_option("--out", score.out, "Output score CSV")->required();

  PurifyOpts purify;
  auto* pu = app.add_subcommand("purify", "Remove outliers, correct labels and prune easy samples");
  pu->add_option("--log", purify.log, "Trajectory log")->required()->check(CLI::ExistingFile);
  pu->add_option("--scores", purify.scores, "Entropy score CSV")->required()->check(CLI::ExistingFile);
  pu->add_option("--delta", purify.delta, "Outlier threshold on max soft-label probability")->capture_default_str();
  pu->add_option("--prune-rate", purify.prune_rate, "Total removal budget as a fraction")->capture_default_str();
  pu->add_flag("--no-correct", purify.no_correct, "Disable label correction");
  pu->add_flag("--no-outliers", purify.no_outliers, "Disable outlier removal");
  pu->add_option("--manifest", purify.manifest, "Dataset manifest to rewrite")->check(CLI::ExistingFile);
  pu->add_option("--manifest-out", purify.manifest_out, "Rewritten manifest");
  pu->add_option("--out", purify.out, "Output plan CSV")->required();

  PruneOpts prune;
  auto* pr = app.add_subcommand("prune", "Rank by score and drop the easiest fraction");
  pr->add_option("--scores", prune.scores, "Score CSV")->required()->check(CLI::ExistingFile);
  pr->add_option("--rate", prune.rate, "Fraction to remove, in [0, 1)")->capture_default_str();
  pr->add_option("--manifest", prune.manifest, "Dataset manifest to rewrite")->check(CLI::ExistingFile);
  pr->add_option("--manifest-out", prune.manifest_out, "Rewritten manifest");
  pr->add_option("--out", prune.out, "Output plan CSV")->required();

  ApplyOpts apply;
  auto* ap = app.add_subcommand("apply", "Apply a prune or purification plan to a manifest");
  ap->add_option("--manifest", apply.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  ap->add_option("--plan", apply.plan, "Plan CSV")->required()->check(CLI::ExistingFile);
  ap->add_option("--out", apply.out, "Output manifest")->required();

  CompareOpts compare;
  auto* cm = app.add_subcommand("compare", "Retrain on pruned subsets and compare held-out accuracy");
  cm->add_option("--data", compare.data, "Training manifest")->required()->check(CLI::ExistingFile);
  cm->add_option("--heldout", compare.heldout, "Held-out manifest")->required()->check(CLI::ExistingFile);
  cm->add_option("--log", compare.log, "Trajectory log of the training set (trained if omitted)")
      ->check(CLI::ExistingFile);
  cm->add_option("--metrics", compare.metrics, "Comma-separated metrics, 'random' allowed")->capture_default_str();
  cm->add_option("--rates", compare.rates, "Comma-separated prune rates")->capture_default_str();
  cm->add_option("--seeds", compare.seeds, "Retraining seeds per cell")->capture_default_str();
  cm->add_option("--epochs", compare.epochs, "Retraining epochs")->capture_default_str();
  cm->add_option("--batch", compare.batch, "Mini-batch size")->capture_default_str();
  cm->add_option("--lr", compare.lr, "Retraining learning rate")->capture_default_str();
  cm->add_option("--init-scale", compare.init_scale, "Weight init standard deviation")->capture_default_str();
  cm->add_option("--seed", compare.seed, "Base seed")->capture_default_str();
  cm->add_option("--score-epochs", compare.score_epochs, "Epochs of the scoring run when --log is omitted")
      ->capture_default_str();
  cm->add_option("--score-lr", compare.score_lr, "Learning rate of the scoring run (default --lr)");
  cm->add_option("--el2n-epoch", compare.el2n_epoch, "Epoch for EL2N (0 = last)")->capture_default_str();
  cm->add_option("--classes", compare.classes, "Override the class count");
  cm->add_option("--out", compare.out, "Output report CSV")->required();

  ReportOpts report;
  auto* rp = app.add_subcommand("report", "Summarize a plan and/or score table");
  rp->add_option("--plan", report.plan, "Purification plan CSV");
  rp->add_option("--scores", report.scores, "Score CSV");
  rp->add_option("--manifest", report.manifest, "Manifest for payload references");
  rp->add_option("--top", report.top, "Number of hardest samples to list")->capture_default_str();
  rp->add_option("--out", report.out, "Write text report here (plus <out>.csv) instead of stdout");

  std::string validate_path;
  auto* va = app.add_subcommand("validate", "Check a trajectory log against its invariants");
  va->add_option("--log", validate_path, "Trajectory log")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << TRAJPRUNE_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (s->parsed()) return cmd_synth(synth, out);
    if (t->parsed()) return cmd_train(train, out, err);
    if (sc->parsed()) return cmd_score(score, out);
    if (pu->parsed()) return cmd_purify(purify, out);
    if (pr->parsed()) return cmd_prune(prune, out);
    if (ap->parsed()) return cmd_apply(apply, out);
    if (cm->parsed()) return cmd_compare(compare, out);
    if (rp->parsed()) return cmd_report(report, out);
    if (va->parsed()) return cmd_validate(validate_path, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("trajprune");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  argv.reserve(storage.size());
  for (auto& a : storage) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace trajprune::cli
