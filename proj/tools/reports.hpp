#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rspread/density.hpp"

namespace rspread::tools {

nlohmann::json check_to_json(const CheckReport& report, const std::string& subject);

/// Accumulates named checks into one structured report; overall pass only if
/// every check passed.
class DiagnosticsReport {
public:
  void add(const std::string& subject, const CheckReport& report);
  void note(const std::string& key, const nlohmann::json& value);

  bool overall_pass() const noexcept { return overall_pass_; }
  nlohmann::json to_json() const;

private:
  bool overall_pass_ = true;
  nlohmann::json checks_ = nlohmann::json::array();
  nlohmann::json notes_ = nlohmann::json::object();
};

void write_text_file(const std::filesystem::path& path, const std::string& content);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& value);

}  // namespace rspread::tools
