#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rspread/profile.hpp"

using namespace rspread;

namespace {

ProfileSpec gamma_spec(double shape, Correlation mode, count_t n0,
                       std::optional<double> r0, count_t atoms = 1000) {
  ProfileSpec spec;
  GammaSpec gamma;
  gamma.shape = shape;
  gamma.mode = mode;
  spec.family = gamma;
  spec.n0 = n0;
  spec.target_r0 = r0;
  spec.atom_count = atoms;
  return spec;
}

// Independent accumulation for cross-checking moments: long double, summed in
// reverse atom order.
long double moment_sphi_oracle(const SpreadingProfile& profile) {
  long double sum = 0.0L;
  const auto& atoms = profile.atoms();
  for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) {
    sum += static_cast<long double>(it->w) * it->s * it->phi;
  }
  return sum;
}

long double mass_oracle(const SpreadingProfile& profile) {
  long double sum = 0.0L;
  for (const auto& atom : profile.atoms()) sum += atom.w;
  return sum;
}

}  // namespace

TEST_CASE("homogeneous build yields a single atom") {
  ProfileSpec spec;
  spec.family = HomogeneousSpec{0.5, 0.5};
  spec.n0 = 100;
  const SpreadingProfile profile = build_profile(spec);
  REQUIRE(profile.atoms().size() == 1);
  CHECK(profile.atoms()[0].s == 0.5);
  CHECK(profile.atoms()[0].phi == 0.5);
  CHECK(profile.atoms()[0].w == 1.0);
  CHECK(profile.n0() == 100);
}

TEST_CASE("gamma quantization produces sorted equal-mass atoms with phi == s") {
  const SpreadingProfile profile =
      build_profile(gamma_spec(0.1, Correlation::equal, 1000000, std::nullopt));
  CHECK(profile.atoms().size() == 1000);
  CHECK(std::abs(static_cast<double>(mass_oracle(profile)) - 1.0) < 1e-12);
  for (std::size_t i = 0; i < profile.atoms().size(); ++i) {
    const auto& atom = profile.atoms()[i];
    CHECK(atom.phi == atom.s);
    CHECK(std::abs(atom.w - 0.001) < 1e-15);
    if (i > 0) CHECK(profile.atoms()[i - 1].s < atom.s);
  }
}

TEST_CASE("independent mode holds phi at the mean susceptibility") {
  const SpreadingProfile profile =
      build_profile(gamma_spec(1.0, Correlation::independent, 1000, std::nullopt, 200));
  const double mean = profile.mean_susceptibility();
  for (const auto& atom : profile.atoms()) {
    CHECK(atom.phi == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("explicit atoms are sorted and mass-normalized") {
  ProfileSpec spec;
  spec.family = ExplicitSpec{{{0.4, 0.3, 0.5}, {0.2, 0.1, 0.5}}};
  spec.n0 = 10;
  const SpreadingProfile profile = build_profile(spec);
  REQUIRE(profile.atoms().size() == 2);
  CHECK(profile.atoms()[0].s == 0.2);
  CHECK(profile.atoms()[1].s == 0.4);
  CHECK(std::abs(static_cast<double>(mass_oracle(profile)) - 1.0) < 1e-12);
}

TEST_CASE("explicit atoms sharing s are merged with mass-weighted phi") {
  ProfileSpec spec;
  spec.family = ExplicitSpec{{{0.2, 0.1, 1.0}, {0.2, 0.3, 3.0}, {0.5, 0.4, 4.0}}};
  spec.n0 = 10;
  const SpreadingProfile profile = build_profile(spec);
  REQUIRE(profile.atoms().size() == 2);
  CHECK(profile.atoms()[0].s == 0.2);
  // (0.1*1 + 0.3*3) / 4
  CHECK(profile.atoms()[0].phi == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(profile.atoms()[0].w == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("non-monotone conditional infectiousness is rejected") {
  ProfileSpec spec;
  spec.family = ExplicitSpec{{{0.2, 0.5, 0.5}, {0.4, 0.3, 0.5}}};
  spec.n0 = 10;
  CHECK_THROWS_AS(build_profile(spec), std::invalid_argument);
}

TEST_CASE("atom bounds are validated") {
  ProfileSpec spec;
  spec.family = ExplicitSpec{{{1.2, 0.5, 1.0}}};
  spec.n0 = 10;
  CHECK_THROWS_AS(build_profile(spec), std::invalid_argument);
  spec.family = ExplicitSpec{{{0.5, 0.5, 0.0}}};
  CHECK_THROWS_AS(build_profile(spec), std::invalid_argument);
  spec.family = GammaSpec{-1.0, std::nullopt, Correlation::equal};
  CHECK_THROWS_AS(build_profile(spec), std::invalid_argument);
}

TEST_CASE("heavy clamping is reported as a scale problem") {
  // Gamma(10, 1) has nearly all mass above 1, so quantization to [0, 1]
  // would pile it onto the boundary.
  ProfileSpec spec = gamma_spec(10.0, Correlation::equal, 1000, std::nullopt, 100);
  std::get<GammaSpec>(spec.family).scale = 1.0;
  CHECK_THROWS_AS(build_profile(spec), std::invalid_argument);
}

TEST_CASE("calibration hits the target on a homogeneous profile") {
  ProfileSpec spec;
  spec.family = HomogeneousSpec{0.5, 0.5};
  spec.n0 = 1000;
  spec.target_r0 = 3.0;
  const SpreadingProfile profile = build_profile(spec);
  // Only susceptibility is rescaled: sigma * iota == 3 / 1000.
  CHECK(profile.atoms()[0].s * profile.atoms()[0].phi ==
        doctest::Approx(0.003).epsilon(1e-12));
  CHECK(profile.basic_reproduction() == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(profile.atoms()[0].phi == 0.5);
}

TEST_CASE("equal-mode calibration scales both coordinates") {
  const SpreadingProfile profile =
      build_profile(gamma_spec(1.0, Correlation::equal, 1000000, 3.0));
  // Calibration identity, recomputed independently.
  const long double moment = moment_sphi_oracle(profile);
  CHECK(std::abs(static_cast<double>(moment) * 1e6 - 3.0) < 1e-9);
  for (const auto& atom : profile.atoms()) CHECK(atom.phi == atom.s);
}

TEST_CASE("calibration rejects degenerate targets") {
  ProfileSpec spec;
  spec.family = HomogeneousSpec{0.5, 0.5};
  spec.n0 = 1000;
  const SpreadingProfile profile = build_profile(spec);
  CHECK_THROWS_AS(calibrate_r0(profile, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_r0(profile, -1.0), std::invalid_argument);

  ProfileSpec zero;
  zero.family = HomogeneousSpec{0.0, 0.5};
  zero.n0 = 1000;
  CHECK_THROWS_AS(calibrate_r0(build_profile(zero), 3.0), std::invalid_argument);
}

TEST_CASE("unreachable targets report the maximal achievable R0") {
  ProfileSpec spec;
  spec.family = HomogeneousSpec{0.5, 0.5};
  spec.n0 = 4;  // max achievable is 4 * 1.0 * 0.5 = 2
  const SpreadingProfile profile = build_profile(spec);
  try {
    calibrate_r0(profile, 3.0);
    FAIL("expected CalibrationError");
  } catch (const CalibrationError& error) {
    CHECK(error.max_achievable_r0() == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("calibration is idempotent") {
  for (const double k : {0.1, 1.0, 10.0}) {
    const SpreadingProfile profile =
        build_profile(gamma_spec(k, Correlation::equal, 100000, 3.0, 400));
    const SpreadingProfile again = calibrate_r0(profile, 3.0);
    REQUIRE(again.atoms().size() == profile.atoms().size());
    for (std::size_t i = 0; i < profile.atoms().size(); ++i) {
      CHECK(std::abs(again.atoms()[i].s - profile.atoms()[i].s) <= 1e-12);
      CHECK(std::abs(again.atoms()[i].phi - profile.atoms()[i].phi) <= 1e-12);
    }
  }
}

TEST_CASE("moments of simple profiles") {
  SpreadingProfile single({{0.5, 0.5, 1.0}}, 10);
  CHECK(single.mean_susceptibility() == 0.5);
  CHECK(single.second_moment_sphi() == 0.25);

  SpreadingProfile pair({{0.2, 0.2, 0.5}, {0.4, 0.4, 0.5}}, 10);
  CHECK(pair.mean_susceptibility() == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("gamma moments match an independent accumulation") {
  const SpreadingProfile profile =
      build_profile(gamma_spec(0.5, Correlation::equal, 100000, 2.5));
  const long double oracle = moment_sphi_oracle(profile);
  CHECK(std::abs(profile.second_moment_sphi() - static_cast<double>(oracle)) < 1e-15);
}

TEST_CASE("quantile quantization converges as atoms double") {
  // Fixed scales chosen so the top quantile sits near 0.1, the magnitude
  // regime calibrated profiles live in.
  const std::pair<double, double> cases[] = {{0.1, 0.025}, {1.0, 0.013}, {10.0, 0.0045}};
  for (const auto& [k, scale] : cases) {
    ProfileSpec coarse = gamma_spec(k, Correlation::equal, 1000, std::nullopt, 1000);
    ProfileSpec fine = gamma_spec(k, Correlation::equal, 1000, std::nullopt, 2000);
    std::get<GammaSpec>(coarse.family).scale = scale;
    std::get<GammaSpec>(fine.family).scale = scale;
    const double moment_coarse = build_profile(coarse).second_moment_sphi();
    const double moment_fine = build_profile(fine).second_moment_sphi();
    CHECK(std::abs(moment_coarse - moment_fine) < 1e-4);
  }
}
