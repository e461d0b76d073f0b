#include <doctest.h>

#include <cmath>
#include <vector>

#include "rspread/density.hpp"
#include "rspread/rng.hpp"

using namespace rspread;

namespace {

SpreadingProfile homogeneous(count_t n0, double r0) {
  ProfileSpec spec;
  spec.family = HomogeneousSpec{0.5, 0.5};
  spec.n0 = n0;
  spec.target_r0 = r0;
  return build_profile(spec);
}

SpreadingProfile gamma_equal(double k, count_t n0, double r0, count_t atoms = 400) {
  ProfileSpec spec;
  GammaSpec gamma;
  gamma.shape = k;
  spec.family = gamma;
  spec.n0 = n0;
  spec.target_r0 = r0;
  spec.atom_count = atoms;
  return build_profile(spec);
}

// Exact R(1) for a population of identical-per-atom nodes, by enumerating the
// first two infections. Independent of the density recursion.
double pair_enumeration_r1(const std::vector<std::pair<double, double>>& nodes) {
  double total_s = 0.0;
  for (const auto& [s, phi] : nodes) total_s += s;
  double value = 0.0;
  for (std::size_t first = 0; first < nodes.size(); ++first) {
    const double p_first = nodes[first].first / total_s;
    const double rest = total_s - nodes[first].first;
    for (std::size_t second = 0; second < nodes.size(); ++second) {
      if (second == first) continue;
      const double p_second = nodes[second].first / rest;
      const double targets = rest - nodes[second].first;
      value += p_first * p_second * nodes[second].second * targets;
    }
  }
  return value;
}

}  // namespace

TEST_CASE("single-atom density is a fixed point of the step") {
  const SpreadingProfile profile = homogeneous(100, 3.0);
  PopulationState state = initial_state(profile);
  state = step_density(state, profile);
  CHECK(state.step == 1);
  CHECK(state.remaining == 99);
  REQUIRE(state.weights.size() == 1);
  CHECK(state.weights[0] == 1.0);
}

TEST_CASE("two-atom step depletes the susceptible end first") {
  // T0 = 100 * 0.3 = 30; tilt factors (1 - 0.2/30) and (1 - 0.4/30).
  const SpreadingProfile profile({{0.2, 0.2, 0.5}, {0.4, 0.4, 0.5}}, 100);
  const PopulationState next = step_density(initial_state(profile), profile);
  const double ratio = next.weights[1] / next.weights[0];
  CHECK(ratio == doctest::Approx(29.6 / 29.8).epsilon(1e-12));
  CHECK(ratio < 1.0);
  CHECK(next.weights[0] + next.weights[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("stepping requires two susceptible individuals") {
  const SpreadingProfile profile = homogeneous(2, 1.0);
  PopulationState state = step_density(initial_state(profile), profile);
  CHECK(state.remaining == 1);
  CHECK_THROWS_AS(step_density(state, profile), std::invalid_argument);
}

TEST_CASE("a dominating individual is rejected") {
  // Mean-field total susceptibility at the first step is 2 * 0.2505 = 0.501,
  // below the top atom's 0.9.
  const SpreadingProfile profile({{0.001, 0.0, 0.999}, {0.9, 0.9, 0.001}}, 2);
  CHECK_THROWS_AS(step_density(initial_state(profile), profile), std::domain_error);
}

TEST_CASE("reproduction number of a calibrated profile starts at R0") {
  const SpreadingProfile profile = gamma_equal(0.5, 100000, 3.0);
  CHECK(reproduction_number(initial_state(profile), profile) ==
        doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("homogeneous reproduction follows the linear decay") {
  const SpreadingProfile profile = homogeneous(100, 3.0);
  PopulationState state = initial_state(profile);
  for (int i = 0; i < 50; ++i) state = step_density(state, profile);
  CHECK(reproduction_number(state, profile) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("heterogeneous R(1) sits below the homogeneous line and near the exact value") {
  // 100 nodes: 50 with s = phi = 0.2, 50 with s = phi = 0.4.
  std::vector<std::pair<double, double>> nodes(100);
  for (int i = 0; i < 50; ++i) nodes[i] = {0.2, 0.2};
  for (int i = 50; i < 100; ++i) nodes[i] = {0.4, 0.4};
  const double exact = pair_enumeration_r1(nodes);

  const SpreadingProfile profile({{0.2, 0.2, 0.5}, {0.4, 0.4, 0.5}}, 100);
  const PopulationState state = step_density(initial_state(profile), profile);
  const double engine = reproduction_number(state, profile);

  const double r0 = reproduction_number(initial_state(profile), profile);
  CHECK(engine < r0 * 99.0 / 100.0);

  // Mean-field / self-infection error scale: max s over total susceptibility.
  const double bound = 0.4 / 30.0;
  CHECK(std::abs(engine - exact) <= bound * engine);
}

TEST_CASE("homogeneous trajectory ends at the classic threshold") {
  const SpreadingProfile profile = homogeneous(1000, 3.0);
  const RTrajectory trajectory = r_trajectory(profile);
  REQUIRE(trajectory.hit_step.has_value());
  CHECK(std::abs(*trajectory.hit_fraction - 2.0 / 3.0) <= 1.0 / 1000.0);
  // Exact linear decay at every recorded step.
  for (std::size_t n = 0; n < trajectory.values.size(); ++n) {
    const double expected = 3.0 * (1000.0 - static_cast<double>(n)) / 1000.0;
    CHECK(std::abs(trajectory.values[n] - expected) <= 1e-12 * expected);
  }
}

TEST_CASE("heterogeneity reaches herd immunity earlier") {
  const RTrajectory skewed = r_trajectory(gamma_equal(0.1, 20000, 3.0));
  const RTrajectory homog = r_trajectory(homogeneous(20000, 3.0));
  REQUIRE(skewed.hit_step.has_value());
  REQUIRE(homog.hit_step.has_value());
  CHECK(*skewed.hit_fraction < *homog.hit_fraction);
}

TEST_CASE("weak heterogeneity approaches the homogeneous line") {
  const count_t n0 = 100000;
  const RTrajectory nearly = r_trajectory(gamma_equal(100.0, n0, 3.0, 1000));
  for (std::size_t n = 0; n < nearly.values.size(); ++n) {
    const double line = 3.0 * static_cast<double>(n0 - n) / static_cast<double>(n0);
    CHECK(std::abs(nearly.values[n] - line) <= 0.01 * 3.0);
  }
}

TEST_CASE("convexity check accepts convex and flags concave sequences") {
  const RTrajectory homog = r_trajectory(homogeneous(2000, 3.0));
  const CheckReport linear = check_convexity(homog);
  CHECK(linear.passed);
  CHECK(linear.max_violation <= 1e-12);

  const RTrajectory skewed = r_trajectory(gamma_equal(0.1, 20000, 3.0));
  CHECK(check_convexity(skewed).passed);

  // Shrinking decrements (1 then 0.5) satisfy the convexity inequality.
  RTrajectory shrinking;
  shrinking.n0 = 10;
  shrinking.values = {3.0, 2.0, 1.5};
  CHECK(check_convexity(shrinking).passed);

  // Growing decrements (0.75 then 1.25) violate it by exactly 0.5.
  RTrajectory concave;
  concave.n0 = 10;
  concave.values = {3.0, 2.25, 1.0};
  const CheckReport bad = check_convexity(concave);
  CHECK_FALSE(bad.passed);
  CHECK(bad.max_violation == doctest::Approx(0.5).epsilon(1e-12));

  RTrajectory tiny;
  tiny.n0 = 10;
  tiny.values = {3.0, 2.0};
  CHECK_THROWS_AS(check_convexity(tiny), std::invalid_argument);
}

TEST_CASE("likelihood-ratio and dominance relation between consecutive states") {
  const SpreadingProfile profile = gamma_equal(0.5, 5000, 3.0, 200);
  PopulationState early = initial_state(profile);
  for (int i = 0; i < 20; ++i) early = step_density(early, profile);
  const PopulationState later = step_density(early, profile);

  CHECK(check_mlrp(early, later).passed);
  CHECK(check_mlrp(early, early).passed);  // constant ratio, equality case
  CHECK_FALSE(check_mlrp(later, early).passed);

  PopulationState mismatch = early;
  mismatch.weights.pop_back();
  CHECK_THROWS_AS(check_mlrp(mismatch, later), std::invalid_argument);
}

TEST_CASE("likelihood-ratio relation holds across long ranges") {
  const SpreadingProfile profile = gamma_equal(0.1, 20000, 3.0);
  const std::vector<count_t> steps = {10, 500};
  const auto states = trace_states(profile, steps);
  CHECK(check_mlrp(states[0], states[1]).passed);
}

TEST_CASE("pool ratio bound: equality for homogeneous, strict for skewed") {
  const RTrajectory homog = r_trajectory(homogeneous(10000, 3.0));
  const CheckReport equality = check_ratio_bound(homog, 100, 5000);
  CHECK(equality.passed);
  CHECK(std::abs(equality.max_violation) <= 1e-12);

  const RTrajectory skewed = r_trajectory(gamma_equal(0.1, 20000, 3.0));
  const count_t last = static_cast<count_t>(skewed.values.size()) - 1;
  const CheckReport strict = check_ratio_bound(skewed, 10, last);
  CHECK(strict.passed);
  CHECK(strict.max_violation < -1e-3);

  CHECK_THROWS_AS(check_ratio_bound(homog, 5000, 100), std::invalid_argument);
  CHECK_THROWS_AS(check_ratio_bound(homog, 0, 100), std::invalid_argument);
}

TEST_CASE("density invariants hold along random profiles") {
  // Hand-rolled generator: random sorted atoms with monotone phi.
  PhiloxStream rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t atom_count = 2 + (rng.next_u64() % 6);
    std::vector<double> s(atom_count), phi(atom_count), w(atom_count);
    for (auto& v : s) v = 0.05 + 0.4 * rng.next_unit();
    for (auto& v : phi) v = 0.05 + 0.9 * rng.next_unit();
    std::sort(s.begin(), s.end());
    std::sort(phi.begin(), phi.end());
    std::vector<SpreadingAtom> atoms(atom_count);
    double total = 0.0;
    for (std::size_t i = 0; i < atom_count; ++i) {
      w[i] = 0.1 + rng.next_unit();
      total += w[i];
    }
    for (std::size_t i = 0; i < atom_count; ++i) atoms[i] = {s[i], phi[i], w[i] / total};
    const SpreadingProfile profile(std::move(atoms), 2000);

    PopulationState state = initial_state(profile);
    RTrajectory trajectory;
    trajectory.n0 = 2000;
    double previous_mean = 1e300;
    double previous_r = 1e300;
    for (int step = 0; step < 200; ++step) {
      double mass = 0.0, mean = 0.0;
      for (std::size_t i = 0; i < state.weights.size(); ++i) {
        mass += state.weights[i];
        mean += state.weights[i] * profile.atoms()[i].s;
      }
      CHECK(std::abs(mass - 1.0) <= 1e-10);
      CHECK(mean <= previous_mean + 1e-12);
      const double r = reproduction_number(state, profile);
      CHECK(r <= previous_r + 1e-9);
      trajectory.values.push_back(r);
      previous_mean = mean;
      previous_r = r;
      const PopulationState next = step_density(state, profile);
      if (step % 50 == 0) CHECK(check_mlrp(state, next).passed);
      state = std::move(next);
    }
    CHECK(check_convexity(trajectory).passed);
  }
}

TEST_CASE("evolver and public step agree") {
  const SpreadingProfile profile = gamma_equal(0.3, 3000, 2.5, 100);
  DensityEvolver evolver(profile);
  PopulationState state = initial_state(profile);
  for (int i = 0; i < 500; ++i) {
    evolver.advance();
    state = step_density(state, profile);
  }
  const PopulationState snapshot = evolver.state();
  CHECK(snapshot.step == state.step);
  CHECK(snapshot.remaining == state.remaining);
  for (std::size_t i = 0; i < state.weights.size(); ++i) {
    CHECK(std::abs(snapshot.weights[i] - state.weights[i]) <= 1e-12);
  }
  CHECK(std::abs(evolver.reproduction() - reproduction_number(state, profile)) <= 1e-12);
}

TEST_CASE("trace_states snapshots match repeated stepping") {
  const SpreadingProfile profile = gamma_equal(1.0, 2000, 2.0, 50);
  const std::vector<count_t> steps = {0, 3, 10};
  const auto states = trace_states(profile, steps);
  REQUIRE(states.size() == 3);
  CHECK(states[0].step == 0);
  CHECK(states[2].step == 10);
  CHECK(states[2].remaining == 1990);

  const std::vector<count_t> unsorted = {5, 2};
  CHECK_THROWS_AS(trace_states(profile, unsorted), std::invalid_argument);
  const std::vector<count_t> beyond = {5000};
  CHECK_THROWS_AS(trace_states(homogeneous(2000, 2.0), beyond), std::out_of_range);
}

TEST_CASE("a pool with zero total susceptibility cannot step") {
  const SpreadingProfile profile({{0.0, 0.0, 1.0}}, 10);
  CHECK_THROWS_AS(step_density(initial_state(profile), profile), std::domain_error);
  // The trajectory itself stops cleanly: R(0) = 0 is already past the threshold.
  const RTrajectory trajectory = r_trajectory(profile);
  CHECK(trajectory.values.size() == 1);
  CHECK(trajectory.hit_step == 0);
}
