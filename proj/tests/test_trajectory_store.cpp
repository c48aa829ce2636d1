#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include <doctest.h>

#include "support.hpp"
#include "trajprune/error.hpp"
#include "trajprune/log_io.hpp"
#include "trajprune/trajectory.hpp"

using namespace trajprune;
using testsupport::TempDir;

namespace {

TrajectoryLog small_log() {
  auto log = make_log({10, 20}, {0, 2}, 3, 1, 99);
  const float vals[] = {1.f, 2.f, 3.f, -1.f, 0.5f, 4.f};
  std::copy(std::begin(vals), std::end(vals), log.logits.begin());
  return log;
}

bool has_issue(const ValidationReport& r, IssueCode code) {
  return std::any_of(r.issues.begin(), r.issues.end(), [&](const auto& i) { return i.code == code; });
}

ErrorCode open_error(const std::filesystem::path& p) {
  try {
    (void)open_log(p);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("open_log accepted a bad file");
  return ErrorCode::IoFailure;
}

}  // namespace

TEST_CASE("row and trajectory views") {
  auto log = make_log({1, 2}, {0, 1}, 2, 3);
  for (std::size_t k = 0; k < log.logits.size(); ++k) log.logits[k] = static_cast<float>(k);
  // epoch-major: epoch 2, sample 1 starts at (1*2 + 1) * 2
  CHECK(log.row(2, 1)[0] == 6.f);
  CHECK(log.row(3, 0)[1] == 9.f);
  const auto traj = log.trajectory(1);
  REQUIRE(traj.size() == 3);
  CHECK(traj[0][0] == 2.f);
  CHECK(traj[2][1] == 11.f);
  CHECK(log.index_of(2) == 1u);
  CHECK_FALSE(log.index_of(7).has_value());
  CHECK_THROWS_AS((void)log.row(0, 0), Error);
  CHECK_THROWS_AS((void)log.row(4, 0), Error);
}

TEST_CASE("validate") {
  SUBCASE("valid log has no issues") {
    const auto r = validate(small_log());
    CHECK(r.ok);
    CHECK(r.issues.empty());
  }
  SUBCASE("label equal to c") {
    auto log = small_log();
    log.labels[1] = 3;
    const auto r = validate(log);
    CHECK_FALSE(r.ok);
    CHECK(has_issue(r, IssueCode::LabelOutOfRange));
  }
  SUBCASE("one NaN reports sample and epoch") {
    auto log = make_log({5, 6, 7}, {0, 0, 1}, 2, 4);
    log.row(3, 2)[1] = std::numeric_limits<float>::quiet_NaN();
    const auto r = validate(log);
    REQUIRE(r.issues.size() == 1);
    CHECK(r.issues[0].code == IssueCode::NonFinite);
    CHECK(r.issues[0].sample_id == 7u);
    CHECK(r.issues[0].epoch == 3u);
  }
  SUBCASE("k injected violations give at least k issues") {
    auto log = make_log({1, 1, 2, 3}, {0, 5, 1, 1}, 2, 2);
    log.row(1, 3)[0] = std::numeric_limits<float>::infinity();
    const auto r = validate(log);
    CHECK(r.issues.size() >= 3);
    CHECK(has_issue(r, IssueCode::DuplicateSampleId));
    CHECK(has_issue(r, IssueCode::LabelOutOfRange));
    CHECK(has_issue(r, IssueCode::NonFinite));
  }
  SUBCASE("shape problems") {
    auto log = small_log();
    log.logits.pop_back();
    CHECK(has_issue(validate(log), IssueCode::ShapeMismatch));
    auto empty = make_log({1}, {0}, 2, 0);
    CHECK(has_issue(validate(empty), IssueCode::NoEpochs));
  }
}

TEST_CASE("binary size for n=1, c=2, T=2") {
  // header 32 + id 8 + label 4 + 2 * (index 4 + 1*2*4)
  CHECK(binary_log_size(1, 2, 2) == 68u);
  TempDir dir;
  auto log = make_log({42}, {1}, 2, 2, 7);
  log.logits = {0.5f, -0.5f, 1.5f, -1.5f};
  write_log(log, dir / "a.ltrj");
  CHECK(std::filesystem::file_size(dir / "a.ltrj") == 68u);
}

TEST_CASE("binary layout is little-endian and field-ordered") {
  TempDir dir;
  auto log = make_log({0x0102030405060708ULL}, {1}, 2, 1, 0xAABBCCDDEEFF0011ULL);
  log.logits = {1.0f, -2.0f};
  write_log(log, dir / "x.ltrj");
  const auto b = testsupport::read_bytes(dir / "x.ltrj");
  REQUIRE(b.size() == binary_log_size(1, 2, 1));
  CHECK(std::memcmp(b.data(), "LTRJ", 4) == 0);
  auto u32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[off + i]);
    return v;
  };
  auto u64 = [&](std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[off + i]);
    return v;
  };
  CHECK(u32(4) == 1u);
  CHECK(u64(8) == 1u);
  CHECK(u32(16) == 2u);
  CHECK(u32(20) == 1u);
  CHECK(u64(24) == 0xAABBCCDDEEFF0011ULL);
  CHECK(u64(32) == 0x0102030405060708ULL);
  CHECK(u32(40) == 1u);
  CHECK(u32(44) == 1u);  // epoch index
  CHECK(u32(48) == 0x3F800000u);
  CHECK(u32(52) == 0xC0000000u);
}

TEST_CASE("round trip and format equivalence") {
  TempDir dir;
  const auto log = small_log();
  write_log(log, dir / "b.ltrj", LogFormat::Binary);
  write_log(log, dir / "j.jsonl", LogFormat::Jsonl);
  const auto b = open_log(dir / "b.ltrj");
  const auto j = open_log(dir / "j.jsonl");
  CHECK(b.n_samples() == 2);
  CHECK(b.n_classes == 3);
  CHECK(b.n_epochs == 1);
  CHECK(b == log);
  CHECK(j == log);
  CHECK(std::memcmp(b.logits.data(), log.logits.data(), log.logits.size() * sizeof(float)) == 0);
}

TEST_CASE("write_log rejects invalid logs") {
  TempDir dir;
  auto empty = make_log({1}, {0}, 2, 0);
  try {
    write_log(empty, dir / "e.ltrj");
    FAIL("T=0 accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FormatError);
  }
  auto bad = small_log();
  bad.labels[0] = 9;
  CHECK_THROWS_AS(write_log(bad, dir / "bad.ltrj"), Error);
  CHECK_THROWS_AS(write_log(small_log(), dir / "no" / "such" / "dir.ltrj"), Error);
}

TEST_CASE("open_log error paths") {
  TempDir dir;
  const auto good = dir / "good.ltrj";
  auto log = make_log({1, 2, 3}, {0, 1, 1}, 2, 3);
  for (std::size_t k = 0; k < log.logits.size(); ++k) log.logits[k] = static_cast<float>(k) * 0.25f;
  write_log(log, good);
  const auto bytes = testsupport::read_bytes(good);

  SUBCASE("magic XXXX") {
    auto b = bytes;
    std::memcpy(b.data(), "XXXX", 4);
    testsupport::write_bytes(dir / "m.ltrj", b);
    CHECK(open_error(dir / "m.ltrj") == ErrorCode::MagicMismatch);
  }
  SUBCASE("truncated") {
    auto b = bytes;
    b.resize(b.size() - 3);
    testsupport::write_bytes(dir / "t.ltrj", b);
    CHECK(open_error(dir / "t.ltrj") == ErrorCode::TruncatedFile);
    b.resize(20);
    testsupport::write_bytes(dir / "h.ltrj", b);
    CHECK(open_error(dir / "h.ltrj") == ErrorCode::TruncatedFile);
  }
  SUBCASE("absurd declared sample count") {
    auto b = bytes;
    for (int i = 8; i < 16; ++i) b[i] = static_cast<char>(0xFF);
    testsupport::write_bytes(dir / "big.ltrj", b);
    CHECK(open_error(dir / "big.ltrj") == ErrorCode::TruncatedFile);
  }
  SUBCASE("NaN logit") {
    auto b = bytes;
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(b.data() + 32 + 3 * 12 + 4, &nan, 4);
    testsupport::write_bytes(dir / "n.ltrj", b);
    CHECK(open_error(dir / "n.ltrj") == ErrorCode::NonFinite);
  }
  SUBCASE("duplicate id") {
    auto b = bytes;
    std::memcpy(b.data() + 32 + 8, b.data() + 32, 8);
    testsupport::write_bytes(dir / "d.ltrj", b);
    CHECK(open_error(dir / "d.ltrj") == ErrorCode::DuplicateSampleId);
  }
  SUBCASE("epoch gap") {
    auto b = bytes;
    const std::size_t second = 32 + 3 * 12 + (4 + 3 * 2 * 4);
    const std::uint32_t three = 3;
    std::memcpy(b.data() + second, &three, 4);
    testsupport::write_bytes(dir / "g.ltrj", b);
    CHECK(open_error(dir / "g.ltrj") == ErrorCode::EpochGap);
  }
  SUBCASE("missing file") { CHECK(open_error(dir / "absent.ltrj") == ErrorCode::IoFailure); }
  SUBCASE("jsonl with a missing epoch") {
    testsupport::write_bytes(dir / "j.jsonl", {});
    std::ofstream out(dir / "j.jsonl");
    out << R"({"version":1,"n_samples":1,"n_classes":2,"n_epochs":2,"run_seed":0})" << '\n'
        << R"({"epoch":1,"sample_id":4,"label":0,"logits":[0.5,1.0]})" << '\n'
        << R"({"epoch":3,"sample_id":4,"label":0,"logits":[0.5,1.0]})" << '\n';
    out.close();
    CHECK(open_error(dir / "j.jsonl") == ErrorCode::EpochGap);
  }
  SUBCASE("jsonl with a null logit") {
    std::ofstream out(dir / "k.jsonl");
    out << R"({"version":1,"n_samples":1,"n_classes":2,"n_epochs":1,"run_seed":0})" << '\n'
        << R"({"epoch":1,"sample_id":4,"label":0,"logits":[null,1.0]})" << '\n';
    out.close();
    CHECK(open_error(dir / "k.jsonl") == ErrorCode::NonFinite);
  }
}
