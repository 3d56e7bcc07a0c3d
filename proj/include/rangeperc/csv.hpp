// SPDX-License-Identifier: Apache-2.0
//
// Minimal CSV tables. Numbers are rendered with std::to_chars (shortest
// round-trip form, independent of the locale); fields never need quoting
// because none of the emitted cells contain commas or quotes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rangeperc {

std::string format_number(double x);
std::string format_number(std::int64_t x);
inline std::string format_number(int x) { return format_number(static_cast<std::int64_t>(x)); }
inline std::string format_number(std::size_t x) {
  return format_number(static_cast<std::int64_t>(x));
}

/// 0x-prefixed 16-digit hex, the canonical seed spelling in outputs.
std::string format_seed(std::uint64_t seed);

class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t size() const { return rows_.size(); }
  const std::vector<std::string>& row(std::size_t i) const { return rows_.at(i); }

  /// Throws std::invalid_argument on a width mismatch or a cell containing
  /// a separator, quote or newline.
  void add_row(std::vector<std::string> cells);

  template <typename... Cells>
  void add(const Cells&... cells) {
    add_row({cell(cells)...});
  }

  std::string str() const;

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(std::string_view s) { return std::string(s); }
  static std::string cell(const char* s) { return s; }
  static std::string cell(bool b) { return b ? "1" : "0"; }
  template <typename T>
  static std::string cell(const T& x) {
    return format_number(x);
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes through a temporary file in the same directory and renames it
/// into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace rangeperc
