#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rspread/density.hpp"
#include "rspread/simulate.hpp"

using namespace rspread;

namespace {

SpreadingProfile two_atom_profile(count_t n0) {
  return SpreadingProfile({{0.2, 0.2, 0.5}, {0.4, 0.4, 0.5}}, n0);
}

// Exact R(n) by summing over every permutation prefix, written independently
// of the library's mask recursion.
double permutation_oracle(const std::vector<SpreadingNode>& nodes, count_t target) {
  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), 0);
  double value = 0.0;
  do {
    double probability = 1.0;
    double remaining = 0.0;
    for (const auto& node : nodes) remaining += node.s;
    for (count_t depth = 0; depth <= target; ++depth) {
      const auto& node = nodes[order[depth]];
      probability *= node.s / remaining;
      remaining -= node.s;
      if (depth == target) value += probability * node.phi * remaining;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  // Each length-(target+1) prefix appears (size - target - 1)! times.
  double repeats = 1.0;
  for (std::size_t i = 2; i < nodes.size() - target; ++i) repeats *= static_cast<double>(i);
  return value / repeats;
}

}  // namespace

TEST_CASE("population draws are deterministic and respect atom masses") {
  const SpreadingProfile profile = two_atom_profile(1000000);
  const Population population = draw_population(profile, 99);
  const Population again = draw_population(profile, 99);
  REQUIRE(population.size() == 1000000);
  for (std::size_t i = 0; i < 1000; ++i) {
    CHECK(population.nodes()[i].s == again.nodes()[i].s);
  }

  count_t high = 0;
  for (const auto& node : population.nodes()) {
    if (node.s == 0.4) ++high;
  }
  // Binomial(1e6, 1/2): three sigmas are 1500.
  const double share = static_cast<double>(high) / 1e6;
  CHECK(std::abs(share - 0.5) <= 3.0 * 0.0005);
}

TEST_CASE("homogeneous population draws identical nodes") {
  ProfileSpec spec;
  spec.family = HomogeneousSpec{0.5, 0.5};
  spec.n0 = 500;
  spec.target_r0 = 3.0;
  const SpreadingProfile profile = build_profile(spec);
  const Population population = draw_population(profile, 7);
  for (const auto& node : population.nodes()) {
    CHECK(node.s == profile.atoms()[0].s);
    CHECK(node.phi == 0.5);
  }
}

TEST_CASE("homogeneous traces are deterministic in value") {
  // All nodes identical, so r_hat(n) = iota * sigma * (N0 - n - 1) exactly.
  const double sigma = 0.01, iota = 0.5;
  std::vector<SpreadingNode> nodes(50, SpreadingNode{sigma, iota});
  const Population population(nodes);
  const SimulationTrace trace = simulate(population, 50, 1);
  REQUIRE(trace.r_hat.size() == 50);
  for (count_t n = 0; n < 50; ++n) {
    const double expected = iota * sigma * static_cast<double>(50 - n - 1);
    CHECK(trace.r_hat[n] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("same seed gives identical traces, different seeds differ") {
  const SpreadingProfile profile = two_atom_profile(500);
  const Population population = draw_population(profile, 3);
  const SimulationTrace a = simulate(population, 400, 11);
  const SimulationTrace b = simulate(population, 400, 11);
  const SimulationTrace c = simulate(population, 400, 12);
  CHECK(a.infection_order == b.infection_order);
  CHECK(a.r_hat == b.r_hat);
  CHECK(a.infection_order != c.infection_order);
}

TEST_CASE("infection order never repeats a node") {
  const SpreadingProfile profile = two_atom_profile(300);
  const Population population = draw_population(profile, 5);
  const SimulationTrace trace = simulate(population, 300, 9);
  std::vector<count_t> order = trace.infection_order;
  std::sort(order.begin(), order.end());
  CHECK(std::adjacent_find(order.begin(), order.end()) == order.end());
}

TEST_CASE("monte-carlo mean of the first step matches the engine") {
  const SpreadingProfile profile = two_atom_profile(200);
  const double engine_r0 = reproduction_number(initial_state(profile), profile);
  const RCurveEstimate estimate = estimate_r_curve(profile, 1, 10000, 42);
  CHECK(std::abs(estimate.mean[0] - engine_r0) <= 3.0 * estimate.se[0]);
}

TEST_CASE("replica estimates are independent of thread count") {
  const SpreadingProfile profile = two_atom_profile(300);
  const RCurveEstimate serial = estimate_r_curve(profile, 50, 64, 5, 1);
  const RCurveEstimate threaded = estimate_r_curve(profile, 50, 64, 5, 4);
  CHECK(serial.mean == threaded.mean);
  CHECK(serial.se == threaded.se);
}

TEST_CASE("homogeneous replica curves collapse to the deterministic formula") {
  ProfileSpec spec;
  spec.family = HomogeneousSpec{0.5, 0.5};
  spec.n0 = 100;
  spec.target_r0 = 3.0;
  const SpreadingProfile profile = build_profile(spec);
  const double product = profile.atoms()[0].s * profile.atoms()[0].phi;

  const RCurveEstimate estimate = estimate_r_curve(profile, 100, 20, 13);
  for (count_t n = 0; n < 100; ++n) {
    const double expected = product * static_cast<double>(100 - n - 1);
    CHECK(std::abs(estimate.mean[n] - expected) <= 1e-12);
    CHECK(estimate.se[n] <= 1e-15);  // identical nodes leave nothing to sample
  }
}

TEST_CASE("estimated curves stay convex up to sampling noise") {
  // Smoothed second differences of the replica mean must not rise above the
  // noise floor of the estimate.
  ProfileSpec spec;
  GammaSpec gamma;
  gamma.shape = 0.2;
  spec.family = gamma;
  spec.n0 = 2000;
  spec.target_r0 = 3.0;
  spec.atom_count = 200;
  const SpreadingProfile profile = build_profile(spec);

  const count_t steps = 400;
  const RCurveEstimate estimate = estimate_r_curve(profile, steps, 400, 2718);

  const count_t window = 20;
  std::vector<double> smooth, noise;
  for (count_t start = 0; start + window <= steps; start += window) {
    double mean = 0.0, se = 0.0;
    for (count_t n = start; n < start + window; ++n) {
      mean += estimate.mean[n];
      se += estimate.se[n];
    }
    smooth.push_back(mean / window);
    noise.push_back(se / window);
  }
  for (std::size_t i = 0; i + 2 < smooth.size(); ++i) {
    // Same orientation as check_convexity: positive means decrements grew.
    const double violation = (smooth[i + 1] - smooth[i + 2]) - (smooth[i] - smooth[i + 1]);
    CHECK(violation <= 3.0 * noise[i + 1]);
  }
}

TEST_CASE("two replicas are legal and produce a finite standard error") {
  const SpreadingProfile profile = two_atom_profile(100);
  const RCurveEstimate estimate = estimate_r_curve(profile, 10, 2, 1);
  for (const double se : estimate.se) CHECK(std::isfinite(se));
  CHECK_THROWS_AS(estimate_r_curve(profile, 10, 1, 1), std::invalid_argument);
}

TEST_CASE("exhaustive oracle on two identical nodes") {
  const std::vector<SpreadingNode> nodes = {{0.3, 0.7}, {0.3, 0.7}};
  CHECK(brute_force_r(nodes, 0) == doctest::Approx(0.7 * 0.3).epsilon(1e-14));
  CHECK(brute_force_r(nodes, 1) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("exhaustive oracle on three distinct nodes") {
  const std::vector<SpreadingNode> nodes = {{0.1, 0.1}, {0.2, 0.2}, {0.3, 0.3}};
  // Enumerating the six infection orders by hand gives exactly 3/100.
  CHECK(brute_force_r(nodes, 1) == doctest::Approx(0.03).epsilon(1e-13));
  CHECK(brute_force_r(nodes, 1) ==
        doctest::Approx(permutation_oracle(nodes, 1)).epsilon(1e-13));
  CHECK(brute_force_r(nodes, 2) == doctest::Approx(0.0).epsilon(1e-14));

  // The density engine agrees within the self-infection error scale,
  // max s over the step-1 pool total 2 * (2.2/12).
  SpreadingProfile profile({{0.1, 0.1, 1.0 / 3}, {0.2, 0.2, 1.0 / 3}, {0.3, 0.3, 1.0 / 3}}, 3);
  PopulationState state = step_density(initial_state(profile), profile);
  const double engine = reproduction_number(state, profile);
  const double pool_total = 2.0 * (2.2 / 12.0);
  CHECK(std::abs(engine - 0.03) <= (0.3 / pool_total) * engine);
}

TEST_CASE("exhaustive oracle agrees with the permutation oracle on random instances") {
  const std::vector<SpreadingNode> nodes = {
      {0.12, 0.2}, {0.21, 0.3}, {0.33, 0.5}, {0.4, 0.55}, {0.52, 0.8}};
  for (count_t n = 0; n < nodes.size(); ++n) {
    CHECK(brute_force_r(nodes, n) ==
          doctest::Approx(permutation_oracle(nodes, n)).epsilon(1e-12));
  }
}

TEST_CASE("enumeration limits are enforced") {
  const std::vector<SpreadingNode> ten(10, SpreadingNode{0.1, 0.1});
  CHECK_THROWS_AS(brute_force_r(ten, 0), std::invalid_argument);
  const std::vector<SpreadingNode> three(3, SpreadingNode{0.1, 0.1});
  CHECK_THROWS_AS(brute_force_r(three, 3), std::invalid_argument);
}

TEST_CASE("monte-carlo agrees with the exhaustive oracle on a small instance") {
  const std::vector<SpreadingNode> nodes = {
      {0.1, 0.1}, {0.25, 0.3}, {0.3, 0.45}, {0.45, 0.5}, {0.6, 0.9}};
  const Population population(nodes);
  const count_t steps = 5;
  const RCurveEstimate estimate = estimate_r_curve(population, steps, 20000, 77);
  for (count_t n = 0; n < steps; ++n) {
    const double exact = brute_force_r(nodes, n);
    CHECK(std::abs(estimate.mean[n] - exact) <= 4.0 * estimate.se[n] + 1e-12);
  }
}

TEST_CASE("relabeling nodes does not change summary statistics") {
  const std::vector<SpreadingNode> nodes = {
      {0.1, 0.1}, {0.2, 0.25}, {0.35, 0.4}, {0.5, 0.6}};
  std::vector<SpreadingNode> shuffled = {nodes[2], nodes[0], nodes[3], nodes[1]};
  const RCurveEstimate a = estimate_r_curve(Population(nodes), 4, 6000, 123);
  const RCurveEstimate b = estimate_r_curve(Population(shuffled), 4, 6000, 456);
  for (count_t n = 0; n < 4; ++n) {
    const double spread = 4.0 * std::sqrt(a.se[n] * a.se[n] + b.se[n] * b.se[n]);
    CHECK(std::abs(a.mean[n] - b.mean[n]) <= spread + 1e-12);
  }
}

TEST_CASE("max_steps beyond the population is rejected") {
  const std::vector<SpreadingNode> nodes(5, SpreadingNode{0.2, 0.2});
  CHECK_THROWS_AS(simulate(Population(nodes), 6, 1), std::invalid_argument);
}
