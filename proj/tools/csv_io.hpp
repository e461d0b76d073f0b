#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace rspread::tools {

/// Shortest round-trip decimal form, locale independent. Identical inputs
/// always produce identical bytes.
std::string format_double(double value);

/// CSV writer producing byte-stable output: "\n" line endings, no locale.
class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, const std::string& header);

  void raw_row(const std::string& line);

  template <typename... Fields>
  void row(const Fields&... fields) {
    std::string line;
    append(line, fields...);
    raw_row(line);
  }

private:
  static void append_one(std::string& line, double value) { line += format_double(value); }
  static void append_one(std::string& line, std::uint64_t value) { line += std::to_string(value); }
  static void append_one(std::string& line, const std::string& value) { line += value; }
  static void append_one(std::string& line, const char* value) { line += value; }

  template <typename First, typename... Rest>
  static void append(std::string& line, const First& first, const Rest&... rest) {
    append_one(line, first);
    if constexpr (sizeof...(rest) > 0) {
      line += ',';
      append(line, rest...);
    }
  }

  std::ofstream out_;
};

struct CsvTable {
  std::string header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace rspread::tools
