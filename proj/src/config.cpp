// SPDX-License-Identifier: Apache-2.0

#include "rangeperc/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rangeperc {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool valid_key(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
    out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::uint64_t parse_seed(std::string_view text) {
  text = trim(text);
  int base = 10;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    base = 16;
    text.remove_prefix(2);
  }
  std::uint64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value, base);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("invalid seed '" + std::string(text) + "': expected decimal or 0x-hex uint64");
  }
  return value;
}

std::int64_t parse_int(std::string_view text, std::string_view key) {
  text = trim(text);
  std::int64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("key '" + std::string(key) + "': expected an integer, got '" +
                      std::string(text) + "'");
  }
  return value;
}

double parse_double(std::string_view text, std::string_view key) {
  text = trim(text);
  double value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size() ||
      !std::isfinite(value)) {
    throw ConfigError("key '" + std::string(key) + "': expected a finite number, got '" +
                      std::string(text) + "'");
  }
  return value;
}

Config Config::from_string(std::string_view text, std::string_view origin) {
  Config cfg;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    if (!valid_key(key)) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) + ": bad key '" +
                        std::string(key) + "'");
    }
    cfg.set(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return cfg;
}

Config Config::from_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return from_string(ss.str(), path.string());
}

void Config::set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }

void Config::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' is not KEY=VALUE");
  }
  const auto key = trim(assignment.substr(0, eq));
  if (!valid_key(key)) throw ConfigError("override has a bad key '" + std::string(key) + "'");
  set(std::string(key), std::string(trim(assignment.substr(eq + 1))));
}

void Config::resolve(std::span<const KeySpec> schema) {
  for (const auto& [key, value] : values_) {
    bool known = false;
    for (const auto& spec : schema) known = known || spec.name == key;
    if (!known) throw ConfigError("unknown config key '" + key + "' for this command");
  }
  for (const auto& spec : schema) {
    if (!values_.contains(spec.name)) values_.emplace(std::string(spec.name), std::string(spec.default_value));
  }
}

bool Config::has(std::string_view key) const {
  const auto it = values_.find(key);
  return it != values_.end() && !it->second.empty();
}

const std::string& Config::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + std::string(key) + "'");
  return it->second;
}

std::int64_t Config::get_int(std::string_view key) const { return parse_int(get(key), key); }

double Config::get_double(std::string_view key) const { return parse_double(get(key), key); }

bool Config::get_bool(std::string_view key) const {
  const auto& v = get(key);
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no" || v.empty()) return false;
  throw ConfigError("key '" + std::string(key) + "': expected a boolean, got '" + v + "'");
}

std::optional<double> Config::get_optional_double(std::string_view key) const {
  if (!has(key)) return std::nullopt;
  return get_double(key);
}

std::vector<std::int64_t> Config::get_int_list(std::string_view key) const {
  std::vector<std::int64_t> out;
  if (!has(key)) return out;
  for (auto piece : split_list(get(key))) out.push_back(parse_int(piece, key));
  return out;
}

std::vector<double> Config::get_double_list(std::string_view key) const {
  std::vector<double> out;
  if (!has(key)) return out;
  for (auto piece : split_list(get(key))) out.push_back(parse_double(piece, key));
  return out;
}

}  // namespace rangeperc
