// SPDX-License-Identifier: Apache-2.0
//
// Per-run JSON manifest: config echo, seeds, version, timestamps and the
// SHA-256 of every output file.

#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace rangeperc {

inline constexpr const char* kToolVersion = "0.1.0";

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// UTC, second resolution, e.g. 2026-01-31T12:00:00Z.
std::string iso8601_utc(std::chrono::system_clock::time_point t);

class RunManifest {
 public:
  RunManifest(std::string command, const std::map<std::string, std::string, std::less<>>& config,
              std::string seed_text, std::uint64_t seed);

  /// Records file name and digest; call after the file is final.
  void add_output(const std::filesystem::path& path);
  nlohmann::json& rows() { return rows_; }
  nlohmann::json& extra() { return extra_; }
  void set_complete(bool complete) { complete_ = complete; }

  nlohmann::json to_json() const;
  /// Stamps the end time and writes atomically.
  void write(const std::filesystem::path& path);

 private:
  std::string command_;
  nlohmann::json config_;
  std::string seed_text_;
  std::uint64_t seed_;
  std::chrono::system_clock::time_point start_;
  std::chrono::steady_clock::time_point start_steady_;
  nlohmann::json outputs_ = nlohmann::json::array();
  nlohmann::json rows_ = nlohmann::json::array();
  nlohmann::json extra_ = nlohmann::json::object();
  bool complete_ = true;
};

std::optional<nlohmann::json> load_manifest(const std::filesystem::path& path);

}  // namespace rangeperc
