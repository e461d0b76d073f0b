#include "csv_io.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace rspread::tools {

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (result.ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buffer, result.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& header)
    : out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out_ << header << '\n';
}

void CsvWriter::raw_row(const std::string& line) { out_ << line << '\n'; }

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(field);
    table.rows.push_back(std::move(fields));
  }
  return table;
}

}  // namespace rspread::tools
