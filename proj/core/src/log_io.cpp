#include "trajprune/log_io.hpp"

#include <array>
#include <bit>
#include <limits>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "trajprune/error.hpp"

namespace trajprune {

namespace {

constexpr std::array<char, 4> kMagic{'L', 'T', 'R', 'J'};

class ByteWriter {
 public:
  explicit ByteWriter(std::size_t reserve) { buf_.reserve(reserve); }

  void put_u32(std::uint32_t v) { put_le(v, 4); }
  void put_u64(std::uint64_t v) { put_le(v, 8); }
  void put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }
  void put_raw(const char* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) buf_.push_back(data[i]);
  }

  [[nodiscard]] const std::vector<char>& bytes() const noexcept { return buf_; }

 private:
  void put_le(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFU));
  }
  std::vector<char> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<char>& buf) : buf_(buf) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
  std::uint64_t u64() { return get_le(8); }
  float f32() { return std::bit_cast<float>(u32()); }
  [[nodiscard]] std::size_t remaining() const noexcept { return buf_.size() - pos_; }
  void skip(std::size_t n) { pos_ += n; }

 private:
  std::uint64_t get_le(int width) {
    if (remaining() < static_cast<std::size_t>(width)) {
      throw Error(ErrorCode::TruncatedFile, "unexpected end of file");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= std::uint64_t{static_cast<unsigned char>(buf_[pos_ + i])} << (8 * i);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  const std::vector<char>& buf_;
  std::size_t pos_ = 0;
};

std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoFailure, "read failed: " + path.string());
  return buf;
}

void spill(const std::filesystem::path& path, const char* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
  out.write(data, static_cast<std::streamsize>(n));
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

// Checks that run for both encodings once the log is materialized.
void check_decoded(const TrajectoryLog& log) {
  std::unordered_set<SampleId> seen;
  seen.reserve(log.n_samples());
  for (std::size_t i = 0; i < log.n_samples(); ++i) {
    if (!seen.insert(log.sample_ids[i]).second) {
      throw Error(ErrorCode::DuplicateSampleId, "sample id " + std::to_string(log.sample_ids[i]));
    }
    if (log.labels[i] >= log.n_classes) {
      throw Error(ErrorCode::FormatError, "label " + std::to_string(log.labels[i]) + " of sample " +
                                              std::to_string(log.sample_ids[i]) + " out of range");
    }
  }
  for (std::size_t k = 0; k < log.logits.size(); ++k) {
    if (!std::isfinite(log.logits[k])) {
      const std::size_t row = k / log.n_classes;
      const std::size_t epoch = row / log.n_samples() + 1;
      throw Error(ErrorCode::NonFinite, "sample " + std::to_string(log.sample_ids[row % log.n_samples()]) +
                                            " epoch " + std::to_string(epoch));
    }
  }
}

TrajectoryLog decode_binary(const std::vector<char>& buf) {
  ByteReader in(buf);
  in.skip(kMagic.size());
  TrajectoryLog log;
  log.schema_version = in.u32();
  if (log.schema_version != kLogSchemaVersion) {
    throw Error(ErrorCode::FormatError, "unsupported LTRJ version " + std::to_string(log.schema_version));
  }
  const std::uint64_t n = in.u64();
  log.n_classes = in.u32();
  log.n_epochs = in.u32();
  log.run_seed = in.u64();
  if (log.n_classes == 0) throw Error(ErrorCode::FormatError, "n_classes is 0");
  if (log.n_epochs == 0) throw Error(ErrorCode::FormatError, "n_epochs is 0");

  // Declared counts must fit in the bytes present before anything is allocated.
  std::uint64_t per_epoch = 0;
  std::uint64_t body = 0;
  if (__builtin_mul_overflow(n, std::uint64_t{log.n_classes} * 4, &per_epoch) ||
      __builtin_add_overflow(per_epoch, std::uint64_t{4}, &per_epoch) ||
      __builtin_mul_overflow(per_epoch, std::uint64_t{log.n_epochs}, &body) ||
      __builtin_add_overflow(body, n * 12, &body) || n > (std::uint64_t{1} << 60)) {
    throw Error(ErrorCode::TruncatedFile, "declared counts exceed any plausible file size");
  }
  if (body > in.remaining()) {
    throw Error(ErrorCode::TruncatedFile, "declared counts need " + std::to_string(body) +
                                              " bytes after the header, " +
                                              std::to_string(in.remaining()) + " present");
  }
  if (body < in.remaining()) {
    throw Error(ErrorCode::FormatError, std::to_string(in.remaining() - body) + " trailing bytes");
  }

  log.sample_ids.resize(n);
  for (auto& id : log.sample_ids) id = in.u64();
  log.labels.resize(n);
  for (auto& y : log.labels) y = in.u32();
  log.logits.resize(n * log.n_classes * log.n_epochs);
  std::size_t k = 0;
  for (Epoch t = 1; t <= log.n_epochs; ++t) {
    const std::uint32_t stored = in.u32();
    if (stored != t) {
      throw Error(ErrorCode::EpochGap, "expected epoch " + std::to_string(t) + ", found " + std::to_string(stored));
    }
    for (std::uint64_t j = 0; j < n * log.n_classes; ++j) log.logits[k++] = in.f32();
  }
  check_decoded(log);
  return log;
}

std::uint64_t json_u64(const nlohmann::json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_unsigned()) {
    throw Error(ErrorCode::FormatError, std::string("missing or invalid field '") + key + "'");
  }
  return it->get<std::uint64_t>();
}

TrajectoryLog decode_jsonl(const std::vector<char>& buf) {
  std::istringstream in(std::string(buf.begin(), buf.end()));
  std::string line;
  auto parse_line = [](const std::string& text, std::size_t lineno) {
    try {
      auto j = nlohmann::json::parse(text);
      if (!j.is_object()) throw Error(ErrorCode::FormatError, "line " + std::to_string(lineno) + " is not an object");
      return j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::FormatError, "line " + std::to_string(lineno) + ": " + e.what());
    }
  };

  std::size_t lineno = 0;
  nlohmann::json header;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = parse_line(line, lineno);
    break;
  }
  if (header.is_null()) throw Error(ErrorCode::MagicMismatch, "empty JSONL log");
  if (!header.contains("n_samples") || header.contains("logits")) {
    throw Error(ErrorCode::MagicMismatch, "first line is not a trajectory log header");
  }

  TrajectoryLog log;
  log.schema_version = static_cast<std::uint32_t>(json_u64(header, "version"));
  if (log.schema_version != kLogSchemaVersion) {
    throw Error(ErrorCode::FormatError, "unsupported version " + std::to_string(log.schema_version));
  }
  const std::uint64_t n = json_u64(header, "n_samples");
  log.n_classes = static_cast<std::uint32_t>(json_u64(header, "n_classes"));
  log.n_epochs = static_cast<std::uint32_t>(json_u64(header, "n_epochs"));
  log.run_seed = json_u64(header, "run_seed");
  if (log.n_classes == 0) throw Error(ErrorCode::FormatError, "n_classes is 0");
  if (log.n_epochs == 0) throw Error(ErrorCode::FormatError, "n_epochs is 0");

  struct Record {
    Epoch epoch;
    SampleId id;
    ClassId label;
    std::vector<float> logits;
  };
  std::vector<Record> records;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = parse_line(line, lineno);
    Record r;
    const std::uint64_t epoch = json_u64(j, "epoch");
    if (epoch < 1 || epoch > log.n_epochs) {
      throw Error(ErrorCode::EpochGap, "line " + std::to_string(lineno) + ": epoch " + std::to_string(epoch) +
                                           " outside 1.." + std::to_string(log.n_epochs));
    }
    r.epoch = static_cast<Epoch>(epoch);
    r.id = json_u64(j, "sample_id");
    const std::uint64_t label = json_u64(j, "label");
    if (label > std::numeric_limits<ClassId>::max()) {
      throw Error(ErrorCode::FormatError, "line " + std::to_string(lineno) + ": label out of range");
    }
    r.label = static_cast<ClassId>(label);
    const auto it = j.find("logits");
    if (it == j.end() || !it->is_array() || it->size() != log.n_classes) {
      throw Error(ErrorCode::FormatError, "line " + std::to_string(lineno) + ": logits must have " +
                                              std::to_string(log.n_classes) + " entries");
    }
    r.logits.reserve(log.n_classes);
    for (const auto& v : *it) {
      // NaN/Inf serialize as null in JSON.
      if (v.is_null()) {
        throw Error(ErrorCode::NonFinite, "sample " + std::to_string(r.id) + " epoch " + std::to_string(r.epoch));
      }
      if (!v.is_number()) throw Error(ErrorCode::FormatError, "line " + std::to_string(lineno) + ": non-numeric logit");
      r.logits.push_back(static_cast<float>(v.get<double>()));
    }
    records.push_back(std::move(r));
  }

  // Sample order is the order of appearance in epoch 1.
  std::unordered_map<SampleId, std::size_t> index;
  for (const auto& r : records) {
    if (r.epoch != 1) continue;
    if (!index.emplace(r.id, log.sample_ids.size()).second) {
      throw Error(ErrorCode::DuplicateSampleId, "sample id " + std::to_string(r.id));
    }
    log.sample_ids.push_back(r.id);
    log.labels.push_back(r.label);
  }
  if (log.sample_ids.size() != n) {
    throw Error(log.sample_ids.size() < n ? ErrorCode::TruncatedFile : ErrorCode::FormatError,
                "epoch 1 has " + std::to_string(log.sample_ids.size()) + " samples, header declares " +
                    std::to_string(n));
  }

  log.logits.assign(n * log.n_classes * log.n_epochs, 0.0F);
  std::vector<std::size_t> per_epoch(log.n_epochs + 1, 0);
  std::vector<bool> filled(n * log.n_epochs, false);
  for (const auto& r : records) {
    const auto it = index.find(r.id);
    if (it == index.end()) {
      throw Error(ErrorCode::FormatError, "sample " + std::to_string(r.id) + " absent from epoch 1");
    }
    const std::size_t i = it->second;
    const std::size_t slot = (r.epoch - 1) * n + i;
    if (filled[slot]) {
      throw Error(ErrorCode::DuplicateSampleId, "sample " + std::to_string(r.id) + " repeated in epoch " +
                                                    std::to_string(r.epoch));
    }
    if (r.label != log.labels[i]) {
      throw Error(ErrorCode::FormatError, "label of sample " + std::to_string(r.id) + " changes across epochs");
    }
    filled[slot] = true;
    ++per_epoch[r.epoch];
    std::copy(r.logits.begin(), r.logits.end(), log.logits.begin() + static_cast<std::ptrdiff_t>(slot * log.n_classes));
  }
  for (Epoch t = 1; t <= log.n_epochs; ++t) {
    if (per_epoch[t] == 0) throw Error(ErrorCode::EpochGap, "epoch " + std::to_string(t) + " missing");
    if (per_epoch[t] != n) {
      throw Error(ErrorCode::TruncatedFile, "epoch " + std::to_string(t) + " has " + std::to_string(per_epoch[t]) +
                                                " of " + std::to_string(n) + " samples");
    }
  }
  check_decoded(log);
  return log;
}

}  // namespace

std::uint64_t binary_log_size(std::uint64_t n_samples, std::uint32_t n_classes,
                              std::uint32_t n_epochs) noexcept {
  return kLtrjHeaderBytes + n_samples * 12 + std::uint64_t{n_epochs} * (4 + n_samples * n_classes * 4);
}

TrajectoryLog open_log(const std::filesystem::path& path) {
  const std::vector<char> buf = slurp(path);
  if (buf.size() >= kMagic.size() && std::memcmp(buf.data(), kMagic.data(), kMagic.size()) == 0) {
    if (buf.size() < kLtrjHeaderBytes) throw Error(ErrorCode::TruncatedFile, "header incomplete");
    return decode_binary(buf);
  }
  std::size_t p = 0;
  if (buf.size() >= 3 && static_cast<unsigned char>(buf[0]) == 0xEF &&
      static_cast<unsigned char>(buf[1]) == 0xBB && static_cast<unsigned char>(buf[2]) == 0xBF) {
    p = 3;
  }
  while (p < buf.size() && (buf[p] == ' ' || buf[p] == '\t' || buf[p] == '\r' || buf[p] == '\n')) ++p;
  if (p < buf.size() && buf[p] == '{') return decode_jsonl(buf);

  std::string head(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(buf.size(), 4)));
  throw Error(ErrorCode::MagicMismatch, path.string() + " starts with \"" + head + "\", not a trajectory log");
}

void write_log(const TrajectoryLog& log, const std::filesystem::path& path, LogFormat format) {
  const ValidationReport report = validate(log);
  if (!report.ok) {
    const auto& first = report.issues.front();
    throw Error(ErrorCode::FormatError, std::string(to_string(first.code)) + ": " + first.message);
  }
  const std::size_t n = log.n_samples();

  if (format == LogFormat::Binary) {
    ByteWriter out(binary_log_size(n, log.n_classes, log.n_epochs));
    out.put_raw(kMagic.data(), kMagic.size());
    out.put_u32(log.schema_version);
    out.put_u64(n);
    out.put_u32(log.n_classes);
    out.put_u32(log.n_epochs);
    out.put_u64(log.run_seed);
    for (SampleId id : log.sample_ids) out.put_u64(id);
    for (ClassId y : log.labels) out.put_u32(y);
    for (Epoch t = 1; t <= log.n_epochs; ++t) {
      out.put_u32(t);
      for (float v : log.epoch_block(t)) out.put_f32(v);
    }
    spill(path, out.bytes().data(), out.bytes().size());
    return;
  }

  std::string text;
  nlohmann::json header = {{"version", log.schema_version},
                           {"n_samples", static_cast<std::uint64_t>(n)},
                           {"n_classes", log.n_classes},
                           {"n_epochs", log.n_epochs},
                           {"run_seed", log.run_seed}};
  text += header.dump();
  text += '\n';
  for (Epoch t = 1; t <= log.n_epochs; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      nlohmann::json rec;
      rec["epoch"] = t;
      rec["sample_id"] = log.sample_ids[i];
      rec["label"] = log.labels[i];
      auto& arr = rec["logits"] = nlohmann::json::array();
      for (float v : log.row(t, i)) arr.push_back(static_cast<double>(v));
      text += rec.dump();
      text += '\n';
    }
  }
  spill(path, text.data(), text.size());
}

}  // namespace trajprune
