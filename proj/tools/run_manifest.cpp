#include "run_manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <ctime>
#include <fstream>
#include <memory>

#include "trajprune/error.hpp"

namespace trajprune::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

RunManifest::RunManifest(std::string subcommand)
    : subcommand_(std::move(subcommand)), start_(std::chrono::steady_clock::now()) {}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["subcommand"] = subcommand_;
  j["tool_version"] = TRAJPRUNE_VERSION;
  j["config"] = config_;
  auto files = [](const std::vector<std::filesystem::path>& paths) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& p : paths) arr.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    return arr;
  };
  j["inputs"] = files(inputs_);
  j["outputs"] = files(outputs_);
  j["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  j["created"] = stamp;
  return j;
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  out << to_json().dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

}  // namespace trajprune::cli
