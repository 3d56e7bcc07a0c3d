// SPDX-License-Identifier: Apache-2.0
//
// Flat key=value run configuration. A file supplies the base values and
// --set KEY=VALUE overrides them; each command resolves the result against
// its own key list, so unknown keys are rejected before any work starts.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rangeperc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeySpec {
  std::string_view name;
  std::string_view default_value;  // "" means unset
  std::string_view help;
};

/// Decimal or 0x-prefixed hex, full 64-bit range.
std::uint64_t parse_seed(std::string_view text);

class Config {
 public:
  /// Lines are `key = value`; '#' starts a comment; blank lines are skipped.
  static Config from_file(const std::filesystem::path& path);
  static Config from_string(std::string_view text, std::string_view origin = "<string>");

  void set(std::string key, std::string value);
  /// Parses "KEY=VALUE".
  void apply_override(std::string_view assignment);

  /// Throws ConfigError naming the first key not in `schema`; then fills
  /// every missing key with its default.
  void resolve(std::span<const KeySpec> schema);

  bool has(std::string_view key) const;  // present and non-empty
  const std::string& get(std::string_view key) const;

  std::int64_t get_int(std::string_view key) const;
  double get_double(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::optional<double> get_optional_double(std::string_view key) const;
  std::vector<std::int64_t> get_int_list(std::string_view key) const;
  std::vector<double> get_double_list(std::string_view key) const;

  const std::map<std::string, std::string, std::less<>>& values() const { return values_; }

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

std::int64_t parse_int(std::string_view text, std::string_view key);
double parse_double(std::string_view text, std::string_view key);

}  // namespace rangeperc
