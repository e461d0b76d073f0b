#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "rspread/density.hpp"
#include "rspread/profile.hpp"

namespace rspread {

/// A population with its own spreading profile, competing for vaccine supply.
class Region {
public:
  Region(std::string name, SpreadingProfile profile);

  const std::string& name() const noexcept { return name_; }
  const SpreadingProfile& profile() const noexcept { return profile_; }
  count_t n0() const noexcept { return profile_.n0(); }
  double r0() const noexcept { return r0_; }

private:
  std::string name_;
  SpreadingProfile profile_;
  double r0_ = 0.0;
};

/// Removes `count` individuals uniformly at random from the susceptible pool:
/// the density is unchanged, only `remaining` shrinks. At least one
/// susceptible individual must remain.
PopulationState vaccinate(const PopulationState& state, count_t count);

/// Number of individuals infected before herd immunity is reached, with
/// `vaccines` administered at step `timing`. Vaccinated individuals are not
/// counted as infected. If the threshold is reached before `timing`, the
/// vaccines are never administered. If R never crosses the threshold the
/// count at pool exhaustion is returned.
count_t cost_of_region(const Region& region, count_t vaccines, count_t timing = 0);

struct AllocationPlan {
  std::vector<count_t> vaccines;              ///< per region
  std::vector<count_t> predicted_infections;  ///< per region, true profiles
  count_t total_supply = 0;
  bool convexity_verified = false;
  bool exhaustive_fallback = false;

  count_t total_vaccines() const;
  count_t total_infections() const;
};

/// Allocates vaccine supply across regions by greedy marginal gain evaluated
/// on each region's true heterogeneous profile. Grants of `granularity`
/// vaccines go to the region whose cost drops most per vaccine, until supply
/// runs out or every region is saturated or already at zero cost. Ties go to
/// the region holding fewer vaccines, then to the lower region index. A
/// region whose integer cost is momentarily flat across one grant stays
/// eligible while its cost is positive, so plateaus cannot starve it.
///
/// Per-region cost convexity over the evaluated grid is verified numerically;
/// if it fails, the allocator falls back to an exhaustive lattice search and
/// flags the plan.
class VaccineAllocator {
public:
  /// `timing` is the step at which each region administers its vaccines.
  explicit VaccineAllocator(std::vector<Region> regions, count_t timing = 0);

  /// granularity 0 selects supply/1000 (at least 1).
  AllocationPlan accounting(count_t supply, count_t granularity = 0);

  /// Same greedy loop, but marginal costs come from a homogeneous surrogate
  /// per region (same n0 and R0, linear R decay). The resulting plan is then
  /// priced against the true heterogeneous profiles.
  AllocationPlan oblivious(count_t supply, count_t granularity = 0);

  const std::vector<Region>& regions() const noexcept { return regions_; }

private:
  count_t cached_cost(std::size_t region, count_t vaccines, bool surrogate);
  AllocationPlan greedy(count_t supply, count_t granularity, bool surrogate);
  bool verify_convexity(std::size_t region, count_t supply);
  AllocationPlan exhaustive(count_t supply, count_t granularity);

  std::vector<Region> regions_;
  std::vector<Region> surrogates_;
  std::vector<std::map<count_t, count_t>> true_costs_;
  std::vector<std::map<count_t, count_t>> surrogate_costs_;
  count_t timing_ = 0;
};

AllocationPlan allocate_accounting(std::span<const Region> regions, count_t supply,
                                   count_t granularity = 0, count_t timing = 0);
AllocationPlan allocate_oblivious(std::span<const Region> regions, count_t supply,
                                  count_t granularity = 0, count_t timing = 0);

struct TimingSweepResult {
  std::vector<count_t> timings;
  std::vector<count_t> costs;
  bool monotone = false;  ///< costs non-decreasing in timing

  count_t spread() const;  ///< max cost minus min cost across timings
};

/// Evaluates cost_of_region at each administration timing.
TimingSweepResult timing_sweep(const Region& region, count_t vaccines,
                               std::span<const count_t> timings);

}  // namespace rspread
