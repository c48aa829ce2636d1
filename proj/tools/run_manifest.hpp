#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace trajprune::cli {

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Provenance record written next to every successful run's primary output.
class RunManifest {
 public:
  explicit RunManifest(std::string subcommand);

  void set_config(nlohmann::ordered_json config) { config_ = std::move(config); }
  void add_input(const std::filesystem::path& path) { inputs_.push_back(path); }
  void add_output(const std::filesystem::path& path) { outputs_.push_back(path); }

  [[nodiscard]] nlohmann::ordered_json to_json() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::string subcommand_;
  nlohmann::ordered_json config_ = nlohmann::ordered_json::object();
  std::vector<std::filesystem::path> inputs_;
  std::vector<std::filesystem::path> outputs_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace trajprune::cli
