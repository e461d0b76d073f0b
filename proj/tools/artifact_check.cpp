#include "artifact_check.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "csv_io.hpp"

namespace rspread::tools {

namespace {

constexpr char kTrajectoryHeader[] = "n,R,remaining,mean_s";
constexpr double kTolerance = 1e-9;

struct TrajectoryArtifact {
  std::vector<std::uint64_t> n;
  std::vector<double> r;
  std::vector<std::uint64_t> remaining;
  std::vector<double> mean_s;
};

std::optional<TrajectoryArtifact> load_trajectory(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  if (table.header != kTrajectoryHeader) return std::nullopt;
  TrajectoryArtifact artifact;
  for (const auto& row : table.rows) {
    if (row.size() != 4) throw std::runtime_error(path.string() + ": malformed row");
    artifact.n.push_back(std::stoull(row[0]));
    artifact.r.push_back(std::stod(row[1]));
    artifact.remaining.push_back(std::stoull(row[2]));
    artifact.mean_s.push_back(std::stod(row[3]));
  }
  if (artifact.n.size() < 2) throw std::runtime_error(path.string() + ": too few rows");
  return artifact;
}

struct FileFinding {
  std::string check;
  bool pass = true;
  double max_violation = 0.0;
  std::uint64_t location = 0;
};

FileFinding check_slopes_non_decreasing(const TrajectoryArtifact& artifact) {
  // Convexity survives decimation: slopes between sampled points must still
  // be non-decreasing.
  FileFinding finding{"convexity"};
  for (std::size_t i = 0; i + 2 < artifact.n.size(); ++i) {
    const double gap1 = static_cast<double>(artifact.n[i + 1] - artifact.n[i]);
    const double gap2 = static_cast<double>(artifact.n[i + 2] - artifact.n[i + 1]);
    const double slope1 = (artifact.r[i + 1] - artifact.r[i]) / gap1;
    const double slope2 = (artifact.r[i + 2] - artifact.r[i + 1]) / gap2;
    const double violation = slope1 - slope2;
    if (violation > finding.max_violation) {
      finding.max_violation = violation;
      finding.location = artifact.n[i + 1];
    }
  }
  finding.pass = finding.max_violation <= kTolerance;
  return finding;
}

FileFinding check_non_increasing(const char* name, const std::vector<std::uint64_t>& n,
                                 const std::vector<double>& values) {
  FileFinding finding{name};
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double violation = values[i + 1] - values[i];
    if (violation > finding.max_violation) {
      finding.max_violation = violation;
      finding.location = n[i + 1];
    }
  }
  finding.pass = finding.max_violation <= kTolerance;
  return finding;
}

FileFinding check_pool_bookkeeping(const TrajectoryArtifact& artifact) {
  FileFinding finding{"pool_bookkeeping"};
  const std::uint64_t n0 = artifact.n.front() + artifact.remaining.front();
  for (std::size_t i = 0; i < artifact.n.size(); ++i) {
    if (artifact.n[i] + artifact.remaining[i] != n0) {
      finding.pass = false;
      finding.max_violation = static_cast<double>(artifact.n[i] + artifact.remaining[i]) -
                              static_cast<double>(n0);
      finding.location = artifact.n[i];
      break;
    }
  }
  return finding;
}

FileFinding check_pool_ratio(const TrajectoryArtifact& artifact) {
  FileFinding finding{"ratio_bound"};
  const std::uint64_t n0 = artifact.n.front() + artifact.remaining.front();
  std::size_t first = 0;
  while (first < artifact.n.size() && artifact.n[first] == 0) ++first;
  const std::size_t last = artifact.n.size() - 1;
  if (first >= last || artifact.n[last] >= n0) return finding;
  const double r1 = artifact.r[first];
  const double r2 = artifact.r[last];
  if (r1 <= 0.0) return finding;
  const double pool_ratio = static_cast<double>(n0 - artifact.n[last]) /
                            static_cast<double>(n0 - artifact.n[first]);
  finding.max_violation = r2 / r1 - pool_ratio;
  finding.location = artifact.n[last];
  finding.pass = finding.max_violation <= kTolerance;
  return finding;
}

}  // namespace

ArtifactCheckOutcome check_artifacts(const std::filesystem::path& directory) {
  if (!std::filesystem::is_directory(directory)) {
    throw std::runtime_error(directory.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  ArtifactCheckOutcome outcome;
  outcome.pass = true;
  outcome.report["directory"] = directory.string();
  outcome.report["files"] = nlohmann::json::array();

  for (const auto& path : files) {
    const auto artifact = load_trajectory(path);
    if (!artifact) continue;
    ++outcome.files_checked;

    nlohmann::json entry;
    entry["file"] = path.filename().string();
    entry["checks"] = nlohmann::json::array();
    const FileFinding findings[] = {
        check_slopes_non_decreasing(*artifact),
        check_non_increasing("monotone_r", artifact->n, artifact->r),
        check_non_increasing("monotone_mean_s", artifact->n, artifact->mean_s),
        check_pool_bookkeeping(*artifact),
        check_pool_ratio(*artifact),
    };
    for (const auto& finding : findings) {
      nlohmann::json check;
      check["check"] = finding.check;
      check["pass"] = finding.pass;
      check["max_violation"] = finding.max_violation;
      check["offending_n"] = finding.location;
      entry["checks"].push_back(check);
      outcome.pass = outcome.pass && finding.pass;
    }
    outcome.report["files"].push_back(entry);
  }

  if (outcome.files_checked == 0) {
    throw std::runtime_error("no trajectory artifacts found in " + directory.string());
  }
  outcome.report["overall_pass"] = outcome.pass;
  return outcome;
}

}  // namespace rspread::tools
