#include "trajprune/synthetic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <unordered_set>

#include "csv.hpp"
#include "trajprune/error.hpp"
#include "trajprune/manifest.hpp"
#include "trajprune/rng.hpp"

namespace trajprune {

namespace {

constexpr std::array<char, 4> kFeatureMagic{'L', 'F', 'E', 'A'};
constexpr std::uint32_t kFeatureVersion = 1;
constexpr std::size_t kFeatureHeaderBytes = 20;

void put_le(std::string& buf, std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFFU));
}

std::uint64_t get_le(const std::vector<char>& buf, std::size_t pos, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= std::uint64_t{static_cast<unsigned char>(buf[pos + i])} << (8 * i);
  return v;
}

}  // namespace

void SyntheticSpec::check() const {
  if (n_classes == 0 || dim == 0) throw Error(ErrorCode::InvalidConfig, "n_classes and dim must be positive");
  if (class_means.size() != std::size_t{n_classes} * dim) {
    throw Error(ErrorCode::InvalidConfig, "class_means must hold n_classes × dim values");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::InvalidConfig, "sigma must be positive");
  if (!(duplicate_fraction >= 0.0 && duplicate_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "duplicate_fraction must lie in [0, 1)");
  }
  if (!(duplicate_jitter >= 0.0)) throw Error(ErrorCode::InvalidConfig, "duplicate_jitter must be >= 0");
  for (std::uint32_t a = 0; a < n_classes; ++a) {
    for (std::uint32_t b = a + 1; b < n_classes; ++b) {
      if (std::equal(class_means.begin() + a * dim, class_means.begin() + (a + 1) * dim,
                     class_means.begin() + b * dim)) {
        throw Error(ErrorCode::InvalidConfig,
                    "class means " + std::to_string(a) + " and " + std::to_string(b) + " coincide");
      }
    }
  }
}

std::vector<double> separated_means(std::uint32_t n_classes, std::uint32_t dim, double separation, double sigma) {
  std::vector<double> means(std::size_t{n_classes} * dim, 0.0);
  const double d = separation * sigma;
  if (n_classes <= 1) return means;
  if (dim >= n_classes) {
    // Scaled simplex corners e_k · d/√2: every pair is exactly d apart.
    for (std::uint32_t k = 0; k < n_classes; ++k) means[k * dim + k] = d / std::numbers::sqrt2;
  } else if (dim == 1) {
    for (std::uint32_t k = 0; k < n_classes; ++k) means[k] = (k - (n_classes - 1) / 2.0) * d;
  } else {
    // Regular polygon in the first two coordinates; adjacent vertices are d apart.
    const double radius = d / (2.0 * std::sin(std::numbers::pi / n_classes));
    for (std::uint32_t k = 0; k < n_classes; ++k) {
      const double angle = 2.0 * std::numbers::pi * k / n_classes;
      means[k * dim + 0] = radius * std::cos(angle);
      means[k * dim + 1] = radius * std::sin(angle);
    }
  }
  return means;
}

SyntheticDataset synth_dataset(const SyntheticSpec& spec) {
  spec.check();
  Rng rng(spec.seed);
  SyntheticDataset ds;
  ds.n_classes = spec.n_classes;
  ds.dim = spec.dim;
  const std::size_t n = std::size_t{spec.n_classes} * spec.n_per_class;
  ds.sample_ids.reserve(n);
  ds.labels.reserve(n);
  ds.features.reserve(n * spec.dim);
  ds.planted_duplicate.reserve(n);

  const auto n_dup = static_cast<std::uint32_t>(std::floor(spec.duplicate_fraction * spec.n_per_class + 1e-9));
  SampleId next_id = 0;
  for (std::uint32_t k = 0; k < spec.n_classes; ++k) {
    for (std::uint32_t j = 0; j < spec.n_per_class; ++j) {
      const bool dup = j < n_dup;
      const double spread = dup ? spec.duplicate_jitter : spec.sigma;
      for (std::uint32_t d = 0; d < spec.dim; ++d) {
        const double x = spec.class_means[k * spec.dim + d] + spread * rng.normal();
        ds.features.push_back(static_cast<float>(x));
      }
      ds.sample_ids.push_back(next_id++);
      ds.labels.push_back(k);
      ds.planted_duplicate.push_back(dup);
    }
  }
  return ds;
}

std::pair<SyntheticDataset, FlipRecord> inject_label_noise(const SyntheticDataset& ds, double ratio,
                                                           std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::RatioOutOfRange, "noise ratio must lie in [0, 1), got " + detail::format_double(ratio));
  }
  SyntheticDataset noisy = ds;
  FlipRecord record;
  const std::size_t n = ds.size();
  const double exact = ratio * static_cast<double>(n);
  const auto k = std::min(n, static_cast<std::size_t>(std::floor(exact + 1e-9 * std::max(1.0, exact))));
  if (k == 0 || ds.n_classes < 2) return {std::move(noisy), std::move(record)};

  // Partial Fisher–Yates: the first k slots become a uniform sample without replacement.
  Rng rng(seed);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  record.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t s = idx[i];
    const ClassId truth = ds.labels[s];
    auto flipped = static_cast<ClassId>(rng.below(ds.n_classes - 1));
    if (flipped >= truth) ++flipped;
    noisy.labels[s] = flipped;
    record.push_back({ds.sample_ids[s], truth, flipped});
  }
  return {std::move(noisy), std::move(record)};
}

SyntheticDataset subset(const SyntheticDataset& ds, std::span<const SampleId> ids) {
  const std::unordered_set<SampleId> wanted(ids.begin(), ids.end());
  SyntheticDataset out;
  out.n_classes = ds.n_classes;
  out.dim = ds.dim;
  const bool track = ds.planted_duplicate.size() == ds.size();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!wanted.contains(ds.sample_ids[i])) continue;
    out.sample_ids.push_back(ds.sample_ids[i]);
    out.labels.push_back(ds.labels[i]);
    const auto row = ds.feature_row(i);
    out.features.insert(out.features.end(), row.begin(), row.end());
    if (track) out.planted_duplicate.push_back(ds.planted_duplicate[i]);
  }
  return out;
}

void write_features(std::span<const float> features, std::uint64_t n, std::uint32_t dim,
                    const std::filesystem::path& path) {
  if (features.size() != n * dim) throw Error(ErrorCode::FormatError, "feature buffer does not match n × dim");
  std::string buf;
  buf.reserve(kFeatureHeaderBytes + features.size() * 4);
  buf.append(kFeatureMagic.data(), kFeatureMagic.size());
  put_le(buf, kFeatureVersion, 4);
  put_le(buf, n, 8);
  put_le(buf, dim, 4);
  for (float v : features) put_le(buf, std::bit_cast<std::uint32_t>(v), 4);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

std::vector<float> read_features(const std::filesystem::path& path, std::uint64_t& n, std::uint32_t& dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  const std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < kFeatureMagic.size() || !std::equal(kFeatureMagic.begin(), kFeatureMagic.end(), buf.begin())) {
    throw Error(ErrorCode::MagicMismatch, path.string() + " is not a feature file");
  }
  if (buf.size() < kFeatureHeaderBytes) throw Error(ErrorCode::TruncatedFile, path.string() + ": header incomplete");
  if (get_le(buf, 4, 4) != kFeatureVersion) throw Error(ErrorCode::FormatError, path.string() + ": unsupported version");
  n = get_le(buf, 8, 8);
  dim = static_cast<std::uint32_t>(get_le(buf, 16, 4));
  const std::uint64_t body = buf.size() - kFeatureHeaderBytes;
  if (dim == 0 || n > body / 4 / dim || n * dim * 4 != body) {
    throw Error(n * dim * 4 > body ? ErrorCode::TruncatedFile : ErrorCode::FormatError,
                path.string() + ": size does not match " + std::to_string(n) + " × " + std::to_string(dim));
  }
  std::vector<float> out(n * dim);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(buf, kFeatureHeaderBytes + 4 * i, 4)));
  }
  return out;
}

void write_dataset(const SyntheticDataset& ds, const std::filesystem::path& manifest_path,
                   const std::filesystem::path& features_path) {
  write_features(ds.features, ds.size(), ds.dim, features_path);
  const std::string ref = features_path.filename().string();
  Manifest manifest;
  manifest.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    manifest.push_back({ds.sample_ids[i], ds.labels[i], ref + "#" + std::to_string(i), false});
  }
  write_manifest(manifest, manifest_path);
}

SyntheticDataset read_dataset(const std::filesystem::path& manifest_path) {
  const Manifest manifest = read_manifest(manifest_path);
  const auto base = manifest_path.parent_path();
  struct Loaded {
    std::vector<float> values;
    std::uint64_t n = 0;
    std::uint32_t dim = 0;
  };
  std::map<std::string, Loaded> files;

  SyntheticDataset ds;
  ClassId max_label = 0;
  for (const auto& e : manifest) {
    const auto hash = e.payload_ref.rfind('#');
    if (hash == std::string::npos) {
      throw Error(ErrorCode::FormatError, "payload_ref '" + e.payload_ref + "' is not '<file>#<row>'");
    }
    const std::string file = e.payload_ref.substr(0, hash);
    const auto row = detail::parse_number<std::uint64_t>(std::string_view(e.payload_ref).substr(hash + 1),
                                                         manifest_path.string());
    auto it = files.find(file);
    if (it == files.end()) {
      Loaded l;
      l.values = read_features(base / file, l.n, l.dim);
      it = files.emplace(file, std::move(l)).first;
    }
    const Loaded& l = it->second;
    if (ds.dim == 0) ds.dim = l.dim;
    if (l.dim != ds.dim) throw Error(ErrorCode::FormatError, "feature files disagree on dim");
    if (row >= l.n) throw Error(ErrorCode::FormatError, "payload_ref '" + e.payload_ref + "' beyond file end");
    ds.sample_ids.push_back(e.sample_id);
    ds.labels.push_back(e.label);
    ds.features.insert(ds.features.end(), l.values.begin() + static_cast<std::ptrdiff_t>(row * l.dim),
                       l.values.begin() + static_cast<std::ptrdiff_t>((row + 1) * l.dim));
    max_label = std::max(max_label, e.label);
  }
  ds.n_classes = manifest.empty() ? 0 : max_label + 1;
  return ds;
}

void write_flip_record(const FlipRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
  out << "sample_id,true_label,flipped_label\n";
  for (const auto& f : record) out << f.sample_id << ',' << f.true_label << ',' << f.flipped_label << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

FlipRecord read_flip_record(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || detail::trim_cr(line) != "sample_id,true_label,flipped_label") {
    throw Error(ErrorCode::FormatError, path.string() + ": not a flip record");
  }
  FlipRecord out;
  while (std::getline(in, line)) {
    const auto row = detail::trim_cr(line);
    if (row.empty()) continue;
    const auto cells = detail::split(row);
    if (cells.size() != 3) throw Error(ErrorCode::FormatError, path.string() + ": wrong column count");
    out.push_back({detail::parse_number<SampleId>(cells[0], path.string()),
                   detail::parse_number<ClassId>(cells[1], path.string()),
                   detail::parse_number<ClassId>(cells[2], path.string())});
  }
  return out;
}

}  // namespace trajprune
