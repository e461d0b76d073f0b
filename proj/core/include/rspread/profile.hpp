#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace rspread {

using count_t = std::uint64_t;

/// One point mass of the joint (susceptibility, infectiousness) distribution.
struct SpreadingAtom {
  double s = 0.0;    ///< susceptibility, in [0, 1]
  double phi = 0.0;  ///< expected infectiousness given s, in [0, 1]
  double w = 0.0;    ///< probability mass, in (0, 1]
};

/// How infectiousness relates to susceptibility across atoms. `equal` keeps
/// phi == s for every atom, `independent` keeps phi constant. The mode also
/// selects the closed-form rescaling used by calibrate_r0.
enum class Correlation { equal, independent, general };

/// Thrown when a requested basic reproduction number cannot be reached
/// without pushing spreading values above 1.
class CalibrationError : public std::runtime_error {
public:
  CalibrationError(const std::string& message, double max_achievable_r0)
      : std::runtime_error(message), max_achievable_r0_(max_achievable_r0) {}

  double max_achievable_r0() const noexcept { return max_achievable_r0_; }

private:
  double max_achievable_r0_;
};

/// Discrete joint distribution of spreading parameters describing a
/// population of n0 individuals.
///
/// Construction establishes the class invariants: atoms strictly sorted by
/// susceptibility (equal-s atoms merged, masses summed), masses normalized to
/// sum to one, and conditional infectiousness non-decreasing along the sorted
/// atoms. Profiles are immutable afterwards and safe to share across threads.
class SpreadingProfile {
public:
  SpreadingProfile(std::vector<SpreadingAtom> atoms, count_t n0,
                   Correlation correlation = Correlation::general);

  const std::vector<SpreadingAtom>& atoms() const noexcept { return atoms_; }
  count_t n0() const noexcept { return n0_; }
  Correlation correlation() const noexcept { return correlation_; }

  /// Weighted mean susceptibility, sum of w*s.
  double mean_susceptibility() const;
  /// Weighted mixed moment, sum of w*s*phi.
  double second_moment_sphi() const;
  /// n0 times the mixed moment; the reproduction number of the fresh
  /// population.
  double basic_reproduction() const;
  double max_susceptibility() const;

private:
  std::vector<SpreadingAtom> atoms_;
  count_t n0_ = 0;
  Correlation correlation_ = Correlation::general;
};

struct HomogeneousSpec {
  double sigma = 0.0;
  double iota = 0.0;
};

/// Gamma-distributed spreading values, quantized to atom_count
/// equal-probability quantile midpoints. When `scale` is omitted a
/// pre-calibration scale is chosen so the top quantile sits at 0.5, leaving
/// calibrate_r0 to set the physical level.
struct GammaSpec {
  double shape = 1.0;
  std::optional<double> scale;
  Correlation mode = Correlation::equal;
};

struct ExplicitSpec {
  std::vector<SpreadingAtom> atoms;
};

struct ProfileSpec {
  std::variant<HomogeneousSpec, GammaSpec, ExplicitSpec> family;
  count_t n0 = 0;
  std::optional<double> target_r0;
  count_t atom_count = 1000;
};

/// Builds the discrete profile described by `spec`. Values drawn above 1 are
/// clamped to 1; the build fails if more than 1% of probability mass lands on
/// the clamp boundary, since that signals a miscalibrated scale. Calibration
/// to spec.target_r0, when present, is applied after the build.
SpreadingProfile build_profile(const ProfileSpec& spec);

/// Rescales susceptibility (and infectiousness, in `equal` mode) by a common
/// closed-form factor so that n0 * sum(w*s*phi) == target_r0. Throws
/// CalibrationError, reporting the maximal achievable value, if the factor
/// would push any atom outside [0, 1].
SpreadingProfile calibrate_r0(const SpreadingProfile& profile,
                              double target_r0);

}  // namespace rspread
