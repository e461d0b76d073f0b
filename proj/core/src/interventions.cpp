#include "rspread/interventions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace rspread {

Region::Region(std::string name, SpreadingProfile profile)
    : name_(std::move(name)), profile_(std::move(profile)) {
  r0_ = profile_.basic_reproduction();
}

PopulationState vaccinate(const PopulationState& state, count_t count) {
  if (state.remaining < 1 || count > state.remaining - 1) {
    std::ostringstream msg;
    msg << "cannot vaccinate " << count << " of " << state.remaining
        << " susceptible individuals; at least one must remain";
    throw std::invalid_argument(msg.str());
  }
  PopulationState next = state;
  next.remaining -= count;
  return next;
}

count_t cost_of_region(const Region& region, count_t vaccines, count_t timing) {
  if (vaccines >= region.n0()) {
    throw std::invalid_argument("vaccine count must be below the region's population size");
  }
  DensityEvolver evolver(region.profile());
  count_t administered = 0;
  for (;;) {
    if (evolver.step() == timing && vaccines > 0 && administered == 0) {
      evolver.vaccinate(vaccines);
      administered = vaccines;
    }
    if (evolver.reproduction() < 1.0 + kHitTolerance) {
      return evolver.step();
    }
    if (!evolver.can_advance()) {
      return region.n0() - administered - evolver.remaining();
    }
    evolver.advance();
  }
}

count_t AllocationPlan::total_vaccines() const {
  return std::accumulate(vaccines.begin(), vaccines.end(), count_t{0});
}

count_t AllocationPlan::total_infections() const {
  return std::accumulate(predicted_infections.begin(), predicted_infections.end(), count_t{0});
}

namespace {

Region make_surrogate(const Region& region) {
  // Heterogeneity-free stand-in with the same population size and R0.
  const double product = region.r0() / static_cast<double>(region.n0());
  const double value = std::sqrt(product);
  SpreadingProfile profile({{value, value, 1.0}}, region.n0(), Correlation::independent);
  return Region(region.name() + "-surrogate", std::move(profile));
}

count_t region_cap(const Region& region) { return region.n0() - 1; }

}  // namespace

VaccineAllocator::VaccineAllocator(std::vector<Region> regions, count_t timing)
    : regions_(std::move(regions)), timing_(timing) {
  if (regions_.empty()) throw std::invalid_argument("allocation needs at least one region");
  surrogates_.reserve(regions_.size());
  for (const auto& region : regions_) surrogates_.push_back(make_surrogate(region));
  true_costs_.resize(regions_.size());
  surrogate_costs_.resize(regions_.size());
}

count_t VaccineAllocator::cached_cost(std::size_t region, count_t vaccines, bool surrogate) {
  auto& cache = surrogate ? surrogate_costs_[region] : true_costs_[region];
  const auto it = cache.find(vaccines);
  if (it != cache.end()) return it->second;
  const Region& target = surrogate ? surrogates_[region] : regions_[region];
  const count_t cost = cost_of_region(target, vaccines, timing_);
  cache.emplace(vaccines, cost);
  return cost;
}

AllocationPlan VaccineAllocator::greedy(count_t supply, count_t granularity, bool surrogate) {
  AllocationPlan plan;
  plan.total_supply = supply;
  plan.vaccines.assign(regions_.size(), 0);
  plan.predicted_infections.assign(regions_.size(), 0);

  count_t left = supply;
  while (left > 0) {
    const count_t grant = std::min(granularity, left);
    // Largest marginal decrease wins. Costs are integer counts, so a region
    // whose true marginal is below one infection per grant shows a zero gain
    // on a plateau even though later grants would pay off; such regions stay
    // eligible while their cost is positive, ranked below any positive gain.
    double best_gain = 0.0;
    std::ptrdiff_t best = -1;
    for (std::size_t r = 0; r < regions_.size(); ++r) {
      if (plan.vaccines[r] + grant > region_cap(regions_[r])) continue;
      const count_t at = cached_cost(r, plan.vaccines[r], surrogate);
      const count_t after = cached_cost(r, plan.vaccines[r] + grant, surrogate);
      const double gain = static_cast<double>(at) - static_cast<double>(after);
      if (gain <= 0.0 && at == 0) continue;  // nothing left to save here
      bool better;
      if (best < 0) {
        better = true;
      } else if ((gain > 0.0) != (best_gain > 0.0)) {
        better = gain > 0.0;
      } else if (gain != best_gain) {
        better = gain > best_gain;
      } else {
        better = plan.vaccines[r] < plan.vaccines[static_cast<std::size_t>(best)];
      }
      if (better) {
        best_gain = gain;
        best = static_cast<std::ptrdiff_t>(r);
      }
    }
    if (best < 0) break;  // every region is saturated or already at zero cost
    plan.vaccines[static_cast<std::size_t>(best)] += grant;
    left -= grant;
  }

  for (std::size_t r = 0; r < regions_.size(); ++r) {
    plan.predicted_infections[r] = cached_cost(r, plan.vaccines[r], /*surrogate=*/false);
  }
  return plan;
}

bool VaccineAllocator::verify_convexity(std::size_t region, count_t supply) {
  const count_t cap = std::min(supply, region_cap(regions_[region]));

  // Coarse probe grid on top of whatever the greedy already evaluated.
  constexpr count_t kProbePoints = 8;
  for (count_t i = 0; i <= kProbePoints; ++i) {
    const count_t v = std::min(cap, (cap / kProbePoints) * i);
    cached_cost(region, v, /*surrogate=*/false);
  }

  const auto& cache = true_costs_[region];
  std::vector<std::pair<count_t, count_t>> points(cache.begin(), cache.end());
  if (points.size() < 3) return true;

  // Divided-difference slopes must be non-decreasing. Costs are integer step
  // counts, so each slope carries rounding noise of up to 2/gap.
  for (std::size_t i = 0; i + 2 < points.size(); ++i) {
    const auto [v0, c0] = points[i];
    const auto [v1, c1] = points[i + 1];
    const auto [v2, c2] = points[i + 2];
    const double gap1 = static_cast<double>(v1 - v0);
    const double gap2 = static_cast<double>(v2 - v1);
    const double slope1 = (static_cast<double>(c1) - static_cast<double>(c0)) / gap1;
    const double slope2 = (static_cast<double>(c2) - static_cast<double>(c1)) / gap2;
    const double slack = 2.0 / gap1 + 2.0 / gap2 + 1e-9;
    if (slope2 < slope1 - slack) return false;
  }
  return true;
}

AllocationPlan VaccineAllocator::exhaustive(count_t supply, count_t granularity) {
  // Dynamic program over the granularity lattice using full per-region cost
  // curves. Only reached when the convexity certificate fails.
  const std::size_t slots = static_cast<std::size_t>(supply / granularity) + 1;
  std::vector<std::vector<count_t>> curves(regions_.size());
  for (std::size_t r = 0; r < regions_.size(); ++r) {
    curves[r].resize(slots);
    for (std::size_t i = 0; i < slots; ++i) {
      const count_t v = std::min<count_t>(static_cast<count_t>(i) * granularity,
                                          region_cap(regions_[r]));
      curves[r][i] = cached_cost(r, v, /*surrogate=*/false);
    }
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> best(slots, kInf);
  std::vector<std::vector<std::size_t>> choice(regions_.size(),
                                               std::vector<std::size_t>(slots, 0));
  for (std::size_t s = 0; s < slots; ++s) {
    best[s] = static_cast<double>(curves[0][s]);
    choice[0][s] = s;
  }

  for (std::size_t r = 1; r < regions_.size(); ++r) {
    std::vector<double> next(slots, kInf);
    for (std::size_t s = 0; s < slots; ++s) {
      for (std::size_t v = 0; v <= s; ++v) {
        const double total = best[s - v] + static_cast<double>(curves[r][v]);
        if (total < next[s]) {
          next[s] = total;
          choice[r][s] = v;
        }
      }
    }
    best = std::move(next);
  }

  AllocationPlan plan;
  plan.total_supply = supply;
  plan.vaccines.assign(regions_.size(), 0);
  plan.predicted_infections.assign(regions_.size(), 0);
  std::size_t s = slots - 1;
  for (std::size_t r = regions_.size(); r-- > 0;) {
    const std::size_t v = choice[r][s];
    plan.vaccines[r] = std::min<count_t>(static_cast<count_t>(v) * granularity,
                                         region_cap(regions_[r]));
    s -= v;
  }
  for (std::size_t r = 0; r < regions_.size(); ++r) {
    plan.predicted_infections[r] = cached_cost(r, plan.vaccines[r], /*surrogate=*/false);
  }
  plan.exhaustive_fallback = true;
  return plan;
}

AllocationPlan VaccineAllocator::accounting(count_t supply, count_t granularity) {
  if (granularity == 0) granularity = std::max<count_t>(1, supply / 1000);
  AllocationPlan plan = greedy(supply, granularity, /*surrogate=*/false);

  plan.convexity_verified = true;
  for (std::size_t r = 0; r < regions_.size(); ++r) {
    if (!verify_convexity(r, supply)) {
      plan.convexity_verified = false;
      break;
    }
  }
  if (!plan.convexity_verified && supply > 0) {
    AllocationPlan fallback = exhaustive(supply, granularity);
    fallback.convexity_verified = false;
    return fallback;
  }
  return plan;
}

AllocationPlan VaccineAllocator::oblivious(count_t supply, count_t granularity) {
  if (granularity == 0) granularity = std::max<count_t>(1, supply / 1000);
  return greedy(supply, granularity, /*surrogate=*/true);
}

AllocationPlan allocate_accounting(std::span<const Region> regions, count_t supply,
                                   count_t granularity, count_t timing) {
  VaccineAllocator allocator(std::vector<Region>(regions.begin(), regions.end()), timing);
  return allocator.accounting(supply, granularity);
}

AllocationPlan allocate_oblivious(std::span<const Region> regions, count_t supply,
                                  count_t granularity, count_t timing) {
  VaccineAllocator allocator(std::vector<Region>(regions.begin(), regions.end()), timing);
  return allocator.oblivious(supply, granularity);
}

count_t TimingSweepResult::spread() const {
  if (costs.empty()) return 0;
  const auto [lo, hi] = std::minmax_element(costs.begin(), costs.end());
  return *hi - *lo;
}

TimingSweepResult timing_sweep(const Region& region, count_t vaccines,
                               std::span<const count_t> timings) {
  TimingSweepResult result;
  result.timings.assign(timings.begin(), timings.end());
  result.costs.reserve(timings.size());
  for (const count_t timing : timings) {
    result.costs.push_back(cost_of_region(region, vaccines, timing));
  }
  result.monotone = true;
  for (std::size_t i = 0; i + 1 < result.costs.size(); ++i) {
    if (result.costs[i + 1] < result.costs[i]) {
      result.monotone = false;
      break;
    }
  }
  return result;
}

}  // namespace rspread
