#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "cli.hpp"
#include "support.hpp"
#include "trajprune/log_io.hpp"
#include "trajprune/manifest.hpp"
#include "trajprune/purify.hpp"
#include "trajprune/score_table_io.hpp"

using namespace trajprune;
using testsupport::read_text;
using testsupport::TempDir;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = trajprune::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string p(const TempDir& d, const std::string& name) { return (d / name).string(); }

std::size_t line_count(const std::filesystem::path& f) {
  const auto text = read_text(f);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

nlohmann::json run_json(const std::string& out) { return nlohmann::json::parse(read_text(out + ".run.json")); }

// synth + train in one go; returns the log path.
std::string make_log_file(const TempDir& d, const std::string& stem, const std::string& seed = "1",
                          const std::string& epochs = "12") {
  REQUIRE(run_cli({"synth", "--classes", "3", "--per-class", "30", "--noise", "0.2", "--seed", "7", "--out",
               p(d, "data")})
              .code == 0);
  const auto log = p(d, stem + ".ltrj");
  REQUIRE(run_cli({"train", "--data", p(d, "data.manifest.jsonl"), "--epochs", epochs, "--seed", seed, "--out", log})
              .code == 0);
  return log;
}

}  // namespace

TEST_CASE("cli synth") {
  TempDir d;
  const auto r = run_cli({"synth", "--classes", "3", "--dim", "2", "--per-class", "200", "--noise", "0.2", "--seed", "7",
                      "--out", p(d, "a")});
  REQUIRE(r.code == 0);
  CHECK(line_count(d / "a.manifest.jsonl") == 600);
  CHECK(line_count(d / "a.flips.csv") == 1 + 120);
  CHECK(std::filesystem::exists(d / "a.features.bin"));

  const auto ja = run_json(p(d, "a"));
  REQUIRE(run_cli({"synth", "--classes", "3", "--dim", "2", "--per-class", "200", "--noise", "0.2", "--seed", "7",
                   "--out", p(d, "a")})
              .code == 0);
  const auto jb = run_json(p(d, "a"));
  REQUIRE(ja["outputs"].size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(ja["outputs"][i]["sha256"] == jb["outputs"][i]["sha256"]);
  CHECK(ja["subcommand"] == "synth");
  CHECK(ja.contains("tool_version"));
  CHECK(ja.contains("wall_time_s"));

  const auto bad = run_cli({"synth", "--noise", "1.5", "--out", p(d, "c")});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("--noise") != std::string::npos);
  CHECK(run_cli({"synth", "--out", p(d, "c"), "--per-class", "0"}).code == 2);
  CHECK(run_cli({"synth"}).code == 2);
  CHECK(run_cli({"frobnicate"}).code == 2);
  CHECK(run_cli({}).code == 2);
}

TEST_CASE("cli train and validate") {
  TempDir d;
  const auto log = make_log_file(d, "run");
  CHECK(open_log(log).n_epochs == 12);
  const auto v = run_cli({"validate", "--log", log});
  CHECK(v.code == 0);
  CHECK(v.out.find("ok") != std::string::npos);
  CHECK(run_cli({"train", "--data", p(d, "data.manifest.jsonl"), "--epochs", "0", "--out", p(d, "z.ltrj")}).code == 2);
  CHECK(run_cli({"train", "--data", p(d, "missing.jsonl"), "--out", p(d, "z.ltrj")}).code == 2);

  SUBCASE("jsonl output matches binary") {
    REQUIRE(run_cli({"train", "--data", p(d, "data.manifest.jsonl"), "--seed", "1", "--format", "jsonl", "--out",
                 p(d, "run.jsonl")})
                .code == 0);
    CHECK(open_log(p(d, "run.jsonl")) == open_log(log));
  }
  SUBCASE("divergence exits 3 with a partial log") {
    const auto r =
        run_cli({"train", "--data", p(d, "data.manifest.jsonl"), "--lr", "1e300", "--epochs", "40", "--out", p(d, "dv")});
    CHECK(r.code == 3);
    CHECK(r.err.find("DivergenceDetected") != std::string::npos);
  }
  SUBCASE("corrupt log") {
    testsupport::write_bytes(d / "junk.ltrj", {'X', 'X', 'X', 'X', 0, 0, 0, 0});
    CHECK(run_cli({"validate", "--log", p(d, "junk.ltrj")}).code == 3);
    CHECK(run_cli({"score", "--log", p(d, "junk.ltrj"), "--out", p(d, "s.csv")}).code == 3);
  }
  SUBCASE("byte-identical reruns") {
    const auto again = p(d, "again.ltrj");
    REQUIRE(run_cli({"train", "--data", p(d, "data.manifest.jsonl"), "--seed", "1", "--out", again}).code == 0);
    CHECK(testsupport::read_bytes(again) == testsupport::read_bytes(log));
  }
}

TEST_CASE("cli score") {
  TempDir d;
  const auto log = make_log_file(d, "run");
  const auto s = p(d, "s.csv");
  REQUIRE(run_cli({"score", "--log", log, "--metric", "entropy", "--every-k", "1", "--out", s}).code == 0);
  const auto t = read_score_table(s);
  CHECK(t.size() == 90);
  CHECK(t.selector == EpochSelector::every_k(1));
  CHECK(t.soft_labels.has_value());
  CHECK(std::filesystem::exists(s + ".json"));

  CHECK(run_cli({"score", "--log", log, "--metric", "forgetting", "--at-epoch", "5", "--out", s}).code == 2);
  CHECK(run_cli({"score", "--log", log, "--metric", "el2n", "--every-k", "2", "--out", s}).code == 2);
  CHECK(run_cli({"score", "--log", log, "--every-k", "2", "--at-epoch", "3", "--out", s}).code == 2);
  CHECK(run_cli({"score", "--log", log, "--at-epoch", "13", "--out", s}).code == 2);
  CHECK(run_cli({"score", "--log", log, "--metric", "grand", "--out", s}).code == 2);
  CHECK(run_cli({"score", "--out", s}).code == 2);

  REQUIRE(run_cli({"score", "--log", log, "--metric", "el2n", "--out", p(d, "e.csv")}).code == 0);
  CHECK(read_score_table(p(d, "e.csv")).selector == EpochSelector::single(12));

  SUBCASE("ensemble averages per sample") {
    const auto log2 = p(d, "run2.ltrj");
    const auto log3 = p(d, "run3.ltrj");
    REQUIRE(run_cli({"train", "--data", p(d, "data.manifest.jsonl"), "--seed", "2", "--out", log2}).code == 0);
    REQUIRE(run_cli({"train", "--data", p(d, "data.manifest.jsonl"), "--seed", "3", "--out", log3}).code == 0);
    const auto ens = p(d, "ens.csv");
    REQUIRE(run_cli({"score", "--metric", "el2n", "--ensemble", log + "," + log2 + "," + log3, "--out", ens}).code == 0);
    std::vector<ScoreTable> parts;
    for (const auto& l : {log, log2, log3}) parts.push_back(score_dataset(open_log(l), Metric::El2n, EpochSelector::single(12)));
    const auto avg = read_score_table(ens);
    for (std::size_t i = 0; i < avg.size(); ++i) {
      const double want = (parts[0].scores[i] + parts[1].scores[i] + parts[2].scores[i]) / 3.0;
      CHECK(avg.scores[i] == doctest::Approx(want).epsilon(1e-12));
    }
    CHECK(run_json(ens)["inputs"].size() == 3);
  }
}

TEST_CASE("cli purify, prune, apply") {
  TempDir d;
  const auto log = make_log_file(d, "run");
  const auto s = p(d, "s.csv");
  REQUIRE(run_cli({"score", "--log", log, "--out", s}).code == 0);

  const auto plan = p(d, "plan.csv");
  REQUIRE(run_cli({"purify", "--log", log, "--scores", s, "--prune-rate", "0.2", "--manifest",
               p(d, "data.manifest.jsonl"), "--manifest-out", p(d, "clean.jsonl"), "--out", plan})
              .code == 0);
  const auto rj = run_json(plan);
  CHECK(rj["config"]["delta"] == 0.1);
  const auto summary = nlohmann::json::parse(read_text(plan + ".json"));
  const auto pp = read_purification_plan(plan);
  CHECK(pp.n_outliers + pp.n_pruned_easy == 18);
  CHECK(summary["n_removed"] == 18);
  const auto clean = read_manifest(p(d, "clean.jsonl"));
  CHECK(clean.size() == 90 - 18);
  CHECK(static_cast<std::size_t>(std::count_if(clean.begin(), clean.end(), [](const auto& e) { return e.corrected; })) <=
        pp.n_corrected);

  // same plan through apply
  REQUIRE(run_cli({"apply", "--manifest", p(d, "data.manifest.jsonl"), "--plan", plan, "--out", p(d, "c2.jsonl")}).code ==
          0);
  CHECK(read_text(p(d, "c2.jsonl")) == read_text(p(d, "clean.jsonl")));

  SUBCASE("pure pruning") {
    const auto pure = p(d, "pure.csv");
    REQUIRE(run_cli({"purify", "--log", log, "--scores", s, "--no-correct", "--no-outliers", "--prune-rate", "0.1",
                 "--out", pure})
                .code == 0);
    const auto x = read_purification_plan(pure);
    CHECK(x.n_outliers == 0);
    CHECK(x.n_corrected == 0);
    CHECK(x.n_pruned_easy == 9);
  }
  SUBCASE("scores without soft labels") {
    REQUIRE(run_cli({"score", "--log", log, "--metric", "aum", "--out", p(d, "a.csv")}).code == 0);
    const auto r = run_cli({"purify", "--log", log, "--scores", p(d, "a.csv"), "--out", p(d, "x.csv")});
    CHECK(r.code == 2);
  }
  SUBCASE("bad delta") {
    CHECK(run_cli({"purify", "--log", log, "--scores", s, "--delta", "0", "--out", p(d, "x.csv")}).code == 2);
  }
  SUBCASE("prune and apply") {
    const auto pr = p(d, "prune.csv");
    REQUIRE(run_cli({"prune", "--scores", s, "--rate", "0.3", "--manifest", p(d, "data.manifest.jsonl"), "--manifest-out",
                 p(d, "kept.jsonl"), "--out", pr})
                .code == 0);
    CHECK(read_prune_plan(pr).removed_ids.size() == 27);
    CHECK(read_manifest(p(d, "kept.jsonl")).size() == 63);
    REQUIRE(run_cli({"apply", "--manifest", p(d, "data.manifest.jsonl"), "--plan", pr, "--out", p(d, "k2.jsonl")}).code ==
            0);
    CHECK(read_text(p(d, "k2.jsonl")) == read_text(p(d, "kept.jsonl")));
    CHECK(run_cli({"prune", "--scores", s, "--rate", "1", "--out", pr}).code == 2);
  }
  SUBCASE("apply rejects unknown plan files") {
    std::ofstream(d / "weird.csv") << "a,b\n1,2\n";
    CHECK(run_cli({"apply", "--manifest", p(d, "data.manifest.jsonl"), "--plan", p(d, "weird.csv"), "--out",
               p(d, "w.jsonl")})
              .code == 2);
  }
}

TEST_CASE("cli compare") {
  TempDir d;
  const auto log = make_log_file(d, "run", "1", "5");
  REQUIRE(run_cli({"synth", "--classes", "3", "--per-class", "20", "--seed", "70", "--out", p(d, "held")}).code == 0);
  const auto out = p(d, "cmp.csv");
  const auto r = run_cli({"compare", "--data", p(d, "data.manifest.jsonl"), "--heldout", p(d, "held.manifest.jsonl"),
                      "--log", log, "--metrics", "entropy,random", "--rates", "0,0.1,0.2,0.3,0.4,0.5", "--epochs",
                      "3", "--out", out});
  REQUIRE(r.code == 0);
  std::istringstream csv(read_text(out));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "rate,metric,mean,std,n");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(csv, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    rows.push_back(f);
  }
  REQUIRE(rows.size() == 13);
  CHECK(rows[0][1] == "none");
  CHECK(rows[1][1] == "entropy");
  CHECK(rows[1][0] == "0");
  CHECK(rows[0][2] == rows[1][2]);
  for (const auto& row : rows) CHECK(row[4] == "4");

  CHECK(run_cli({"compare", "--data", p(d, "data.manifest.jsonl"), "--heldout", p(d, "held.manifest.jsonl"), "--rates",
             "0,1.5", "--out", out})
            .code == 2);
  CHECK(run_cli({"compare", "--data", p(d, "data.manifest.jsonl"), "--heldout", p(d, "held.manifest.jsonl"), "--metrics",
             "entropy,bogus", "--out", out})
            .code == 2);
  // without --log the command trains its own scoring run
  CHECK(run_cli({"compare", "--data", p(d, "data.manifest.jsonl"), "--heldout", p(d, "held.manifest.jsonl"), "--rates",
             "0.2", "--seeds", "1", "--epochs", "2", "--score-epochs", "3", "--out", p(d, "c2.csv")})
            .code == 0);
  CHECK(run_cli({"compare", "--data", p(d, "data.manifest.jsonl"), "--heldout", p(d, "held.manifest.jsonl"), "--log", log,
             "--rates", "0.2", "--seeds", "1", "--lr", "1e300", "--epochs", "30", "--out", p(d, "c3.csv")})
            .code == 3);
}

TEST_CASE("cli report") {
  TempDir d;
  PurificationPlan plan;
  for (SampleId i = 0; i < 20; ++i) plan.entries.push_back({i, Verdict::Keep, 1, 1, 0.1 * static_cast<double>(i), 0.9});
  SUBCASE("empty plan") {
    write_purification_plan(plan, d / "empty.csv");
    const auto r = run_cli({"report", "--plan", p(d, "empty.csv")});
    CHECK(r.code == 0);
    CHECK(r.out.find("no actions") != std::string::npos);
  }
  SUBCASE("three corrections and top 10") {
    for (SampleId i : {3, 7, 11}) {
      plan.entries[i].verdict = Verdict::Relabel;
      plan.entries[i].new_label = 2;
    }
    plan.n_corrected = 3;
    plan.entries[5].verdict = Verdict::RemoveOutlier;
    plan.n_outliers = 1;
    write_purification_plan(plan, d / "plan.csv");
    const auto out = p(d, "rep.txt");
    const auto r = run_cli({"report", "--plan", p(d, "plan.csv"), "--top", "10", "--out", out});
    REQUIRE(r.code == 0);
    const auto text = read_text(out);
    CHECK(text.find("corrections (3)") != std::string::npos);
    CHECK(text.find("3: 1 -> 2") != std::string::npos);
    CHECK(text.find("11: 1 -> 2") != std::string::npos);
    const auto csv = read_text(out + ".csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 + 1 + 10);
    std::size_t corrections = 0, hardest = 0, pos = 0;
    while ((pos = csv.find("\ncorrection,", pos)) != std::string::npos) ++corrections, ++pos;
    pos = 0;
    while ((pos = csv.find("\nhardest,", pos)) != std::string::npos) ++hardest, ++pos;
    CHECK(corrections == 3);
    CHECK(hardest == 10);
    // hardest first: entropy 1.9 belongs to id 19
    CHECK(csv.find("hardest,19,1.9") != std::string::npos);
  }
  SUBCASE("missing inputs") {
    CHECK(run_cli({"report", "--plan", p(d, "nope.csv")}).code == 2);
    CHECK(run_cli({"report"}).code == 2);
  }
}
