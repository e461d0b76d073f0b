#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rspread/profile.hpp"

namespace rspread::tools {

/// Configuration problem tied to a named field. Reported before any output
/// file is written.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string& reason)
      : std::runtime_error("config field '" + field + "': " + reason),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

struct ProfileConfig {
  std::string family;  // homogeneous | gamma | explicit
  double sigma = 0.0;
  double iota = 0.0;
  double shape = 1.0;
  std::optional<double> scale;
  std::string mode = "equal";  // gamma: equal | independent
  std::vector<std::array<double, 3>> atoms;

  bool operator==(const ProfileConfig&) const = default;
};

struct RegionConfig {
  std::string name;
  ProfileConfig profile;
  count_t n0 = 0;
  double r0 = 0.0;

  bool operator==(const RegionConfig&) const = default;
};

/// One experiment run. Which fields apply depends on `experiment`; unknown or
/// out-of-place keys in the config file are rejected by name.
struct ExperimentConfig {
  int schema_version = 1;
  std::string experiment;  // trajectory | k_sweep | mc_validate |
                           // oracle_validate | allocation | timing_sweep
  count_t seed = 1;
  unsigned threads = 0;    // 0 = all hardware threads
  std::string out_dir = "out";
  count_t decimate = 0;    // 0 = auto (1 row per 1000 steps when n0 >= 1e5)

  count_t n0 = 0;
  double r0 = 0.0;
  count_t atom_count = 1000;
  count_t overshoot = 0;

  std::optional<ProfileConfig> profile;
  std::vector<double> k_grid;
  std::string mode = "equal";

  count_t replicas = 0;
  count_t steps = 0;  // 0 = up to the herd-immunity step
  bool write_traces = false;

  count_t instances = 0;
  count_t max_nodes = 8;

  std::vector<count_t> supplies;
  count_t granularity = 0;  // 0 = supply/1000
  count_t vacc_step = 0;
  std::vector<RegionConfig> regions;

  count_t vaccines = 0;
  std::vector<count_t> timings;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

/// Checks every referenced numeric parameter against the preconditions of the
/// modules the experiment will call. Throws ConfigError naming the field.
void validate_config(const ExperimentConfig& config);

/// Translates the profile part of a config into a buildable spec.
ProfileSpec to_profile_spec(const ProfileConfig& profile, count_t n0,
                            std::optional<double> target_r0, count_t atom_count);

count_t effective_decimation(const ExperimentConfig& config);

}  // namespace rspread::tools
