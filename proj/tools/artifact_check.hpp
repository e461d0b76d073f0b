#pragma once

#include <filesystem>

#include <json.hpp>

namespace rspread::tools {

struct ArtifactCheckOutcome {
  bool pass = false;
  int files_checked = 0;
  nlohmann::json report;
};

/// Re-validates exported trajectory CSVs (header n,R,remaining,mean_s) found
/// in `directory`: convexity and monotonicity of R, monotone mean
/// susceptibility, pool bookkeeping, and the susceptible-pool ratio bound.
/// Throws std::runtime_error if the directory holds no trajectory artifacts.
ArtifactCheckOutcome check_artifacts(const std::filesystem::path& directory);

}  // namespace rspread::tools
