#pragma once

#include <span>
#include <vector>

#include "rspread/profile.hpp"

namespace rspread {

struct SpreadingNode {
  double s = 0.0;
  double phi = 0.0;
};

/// A concrete population of individuals, one (s, phi) pair each.
class Population {
public:
  explicit Population(std::vector<SpreadingNode> nodes);

  const std::vector<SpreadingNode>& nodes() const noexcept { return nodes_; }
  count_t size() const noexcept { return static_cast<count_t>(nodes_.size()); }
  double total_susceptibility() const noexcept { return total_susceptibility_; }

private:
  std::vector<SpreadingNode> nodes_;
  double total_susceptibility_ = 0.0;
};

/// Samples n0 individuals i.i.d. from the profile's atom distribution.
/// Deterministic given the seed.
Population draw_population(const SpreadingProfile& profile, count_t seed);

/// One realization of the infection process.
///
/// r_hat(n) is the conditional expectation of the infections generated by the
/// nth infected individual given the realization: I(v_n) times the summed
/// susceptibility of everyone still susceptible after v_n is removed. This
/// estimates the same quantity as sampling secondary infections, with
/// strictly lower variance.
struct SimulationTrace {
  count_t seed = 0;
  std::vector<count_t> infection_order;
  std::vector<double> r_hat;
};

/// Runs the step process on a fixed population: each step infects a
/// susceptible individual drawn proportionally to susceptibility, records
/// r_hat, and removes it from the pool. Deterministic given the seed.
SimulationTrace simulate(const Population& population, count_t max_steps, count_t seed);

/// Pointwise mean and standard error of r_hat over independent replicas.
struct RCurveEstimate {
  std::vector<double> mean;
  std::vector<double> se;
  count_t replicas = 0;
};

/// Replica i uses seed base_seed + i; results do not depend on thread count
/// or execution order. Each replica draws its own population from the
/// profile, so the estimate averages over populations and infection orders.
RCurveEstimate estimate_r_curve(const SpreadingProfile& profile, count_t steps,
                                count_t replicas, count_t base_seed,
                                unsigned threads = 0);

/// Same estimator on one fixed population; only the infection order varies
/// across replicas. This is the variant comparable to brute_force_r.
RCurveEstimate estimate_r_curve(const Population& population, count_t steps,
                                count_t replicas, count_t base_seed,
                                unsigned threads = 0);

/// Exact expected number of infections generated by the nth infected
/// individual, by enumerating every ordered infection prefix of length n+1
/// weighted by its sequential probability. Limited to 9 nodes.
double brute_force_r(std::span<const SpreadingNode> nodes, count_t n);

}  // namespace rspread
