// SPDX-License-Identifier: Apache-2.0

#include "rangeperc/manifest.hpp"

#include <openssl/evp.h>

#include <ctime>
#include <fstream>
#include <stdexcept>

#include "rangeperc/csv.hpp"

namespace rangeperc {

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

std::string iso8601_utc(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest::RunManifest(std::string command,
                         const std::map<std::string, std::string, std::less<>>& config,
                         std::string seed_text, std::uint64_t seed)
    : command_(std::move(command)),
      config_(nlohmann::json::object()),
      seed_text_(std::move(seed_text)),
      seed_(seed),
      start_(std::chrono::system_clock::now()),
      start_steady_(std::chrono::steady_clock::now()) {
  for (const auto& [k, v] : config) config_[k] = v;
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs_.push_back({{"file", path.filename().string()}, {"sha256", sha256_file(path)}});
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["tool"] = "rangeperc";
  j["version"] = kToolVersion;
  j["command"] = command_;
  j["config"] = config_;
  j["master_seed"] = seed_text_;
  j["master_seed_hex"] = format_seed(seed_);
  j["rows"] = rows_;
  j["outputs"] = outputs_;
  j["complete"] = complete_;
  if (!extra_.empty()) j["extra"] = extra_;
  return j;
}

void RunManifest::write(const std::filesystem::path& path) {
  nlohmann::json j = to_json();
  const auto end = std::chrono::system_clock::now();
  j["start_time"] = iso8601_utc(start_);
  j["end_time"] = iso8601_utc(end);
  j["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_steady_).count();
  write_file_atomic(path, j.dump(2) + "\n");
}

std::optional<nlohmann::json> load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
}

}  // namespace rangeperc
