#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rspread/profile.hpp"

namespace rspread {

/// R values at or below 1 + kHitTolerance count as having reached herd
/// immunity. The slack keeps threshold cases (a vaccination putting R(0)
/// exactly at 1) on the "reached" side of rounding.
inline constexpr double kHitTolerance = 1e-9;

/// Susceptibility density of the still-susceptible population after `step`
/// infections. Weights align with the atoms of the profile that produced the
/// state and sum to one; `remaining` counts susceptible individuals, i.e.
/// n0 - step - vaccinated.
struct PopulationState {
  count_t step = 0;
  count_t remaining = 0;
  std::vector<double> weights;
};

PopulationState initial_state(const SpreadingProfile& profile);

/// Advances the susceptibility density by one infection: weights are tilted
/// by the per-atom survival probability 1 - s/T, where T is the mean-field
/// total susceptibility of the remaining pool, then renormalized.
///
/// Throws std::domain_error when some atom with positive mass has s > T; a
/// single individual dominating the pool's total susceptibility breaks the
/// mean-field recursion.
PopulationState step_density(const PopulationState& state,
                             const SpreadingProfile& profile);

/// Expected number of infections generated by the next infected individual:
/// remaining * sum(w_i * s_i * phi_i).
double reproduction_number(const PopulationState& state,
                           const SpreadingProfile& profile);

/// Incremental density evolution over a fixed atom grid. Weights are kept
/// unnormalized internally (total mass telescopes to remaining/n0, so it
/// cannot underflow while remaining >= 2); snapshots renormalize.
class DensityEvolver {
public:
  explicit DensityEvolver(const SpreadingProfile& profile);

  count_t step() const noexcept { return step_; }
  count_t remaining() const noexcept { return remaining_; }
  bool can_advance() const noexcept { return remaining_ >= 2; }

  /// Mean-field total susceptibility of the remaining pool.
  double total_susceptibility() const { return static_cast<double>(remaining_) * mean_susceptibility(); }
  double mean_susceptibility() const { return m1_ / mass_; }
  double reproduction() const { return static_cast<double>(remaining_) * (m2_ / mass_); }

  void advance();
  /// Removes `count` individuals uniformly at random from the susceptible
  /// pool: the density is unchanged, only `remaining` shrinks.
  void vaccinate(count_t count);

  PopulationState state() const;

private:
  const SpreadingProfile* profile_;
  std::vector<double> s_;
  std::vector<double> sphi_;
  std::vector<double> w_;
  double mass_ = 0.0;
  double m1_ = 0.0;
  double m2_ = 0.0;
  count_t step_ = 0;
  count_t remaining_ = 0;
  std::ptrdiff_t top_alive_ = -1;
};

/// The R(0), R(1), ... sequence together with the herd-immunity threshold.
struct RTrajectory {
  std::vector<double> values;
  std::optional<count_t> hit_step;
  std::optional<double> hit_fraction;
  count_t n0 = 0;

  std::vector<double> first_differences() const;
};

struct TrajectoryOptions {
  /// Extra steps to keep evolving after the threshold is reached.
  count_t overshoot = 0;
  /// Hard cap on the number of steps (0 means no cap beyond exhaustion).
  count_t max_steps = 0;
};

/// Per-step observer for exports: (n, R, remaining, mean susceptibility).
using StepObserver =
    std::function<void(count_t, double, count_t, double)>;

/// Evolves the density from step 0 until R reaches the herd-immunity
/// threshold (plus the overshoot horizon) or the pool is exhausted.
RTrajectory r_trajectory(const SpreadingProfile& profile,
                         const TrajectoryOptions& options = {},
                         const StepObserver& observer = nullptr);

/// Snapshots the density at the requested steps (sorted, unique) in a single
/// pass. Throws std::out_of_range if a step cannot be reached.
std::vector<PopulationState> trace_states(const SpreadingProfile& profile,
                                          std::span<const count_t> steps);

/// Outcome of one numerical diagnostic.
struct CheckReport {
  std::string check;
  bool passed = false;
  double max_violation = 0.0;
  std::optional<count_t> location;
  double tolerance = 0.0;
  std::string detail;
};

/// Verifies that first differences R(n) - R(n+1) are non-increasing, i.e.
/// R(n+1) - R(n+2) <= R(n) - R(n+1) for every n. Requires >= 3 values.
CheckReport check_convexity(const RTrajectory& trajectory, double tolerance = 1e-9);

/// Verifies R(n+1) <= R(n) along the trajectory.
CheckReport check_monotone_r(const RTrajectory& trajectory, double tolerance = 1e-9);

/// Verifies the monotone likelihood ratio property between two states on the
/// same atom grid: w_a/w_b non-decreasing in s over atoms where both masses
/// exceed 1e-15, plus first-order stochastic dominance of `a` over `b`
/// (CDF of a <= CDF of b pointwise). For a taken at an earlier step than b
/// both hold along the density recursion; swapping the arguments flips the
/// ratio direction and fails.
CheckReport check_mlrp(const PopulationState& a, const PopulationState& b,
                       double tolerance = 1e-9);

/// Verifies R(n2)/R(n1) <= (n0 - n2)/(n0 - n1) for 0 < n1 < n2.
CheckReport check_ratio_bound(const RTrajectory& trajectory, count_t n1,
                              count_t n2, double tolerance = 1e-9);

}  // namespace rspread
