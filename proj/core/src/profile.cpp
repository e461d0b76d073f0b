#include "rspread/profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/gamma.hpp>

namespace rspread {

namespace {

constexpr double kMassTolerance = 1e-12;
constexpr double kMaxClampedMass = 0.01;

double kahan_sum(const std::vector<SpreadingAtom>& atoms, double (*term)(const SpreadingAtom&)) {
  double sum = 0.0, carry = 0.0;
  for (const auto& atom : atoms) {
    const double y = term(atom) - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

void validate_atom(const SpreadingAtom& atom, std::size_t index) {
  auto fail = [&](const char* what) {
    std::ostringstream msg;
    msg << "atom " << index << ": " << what << " (s=" << atom.s
        << ", phi=" << atom.phi << ", w=" << atom.w << ")";
    throw std::invalid_argument(msg.str());
  };
  if (!(atom.s >= 0.0 && atom.s <= 1.0)) fail("susceptibility outside [0, 1]");
  if (!(atom.phi >= 0.0 && atom.phi <= 1.0)) fail("infectiousness outside [0, 1]");
  if (!(atom.w > 0.0)) fail("mass must be positive");
}

}  // namespace

SpreadingProfile::SpreadingProfile(std::vector<SpreadingAtom> atoms, count_t n0,
                                   Correlation correlation)
    : atoms_(std::move(atoms)), n0_(n0), correlation_(correlation) {
  if (atoms_.empty()) throw std::invalid_argument("profile needs at least one atom");
  if (n0_ < 1) throw std::invalid_argument("population size must be at least 1");
  for (std::size_t i = 0; i < atoms_.size(); ++i) validate_atom(atoms_[i], i);

  std::stable_sort(atoms_.begin(), atoms_.end(),
                   [](const SpreadingAtom& a, const SpreadingAtom& b) { return a.s < b.s; });

  // Merge atoms sharing a susceptibility value; phi becomes the mass-weighted
  // conditional mean.
  std::vector<SpreadingAtom> merged;
  merged.reserve(atoms_.size());
  for (const auto& atom : atoms_) {
    if (!merged.empty() && merged.back().s == atom.s) {
      auto& last = merged.back();
      const double w = last.w + atom.w;
      last.phi = (last.phi * last.w + atom.phi * atom.w) / w;
      last.w = w;
    } else {
      merged.push_back(atom);
    }
  }
  atoms_ = std::move(merged);

  const double total = kahan_sum(atoms_, [](const SpreadingAtom& a) { return a.w; });
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::invalid_argument("total probability mass must be positive and finite");
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    for (auto& atom : atoms_) atom.w /= total;
  }

  for (std::size_t i = 1; i < atoms_.size(); ++i) {
    if (atoms_[i].phi < atoms_[i - 1].phi) {
      std::ostringstream msg;
      msg << "conditional infectiousness must be non-decreasing in s: atom " << i
          << " has phi=" << atoms_[i].phi << " below " << atoms_[i - 1].phi;
      throw std::invalid_argument(msg.str());
    }
  }

  if (correlation_ == Correlation::equal) {
    for (const auto& atom : atoms_) {
      if (atom.phi != atom.s) {
        throw std::invalid_argument("equal correlation mode requires phi == s for every atom");
      }
    }
  }
}

double SpreadingProfile::mean_susceptibility() const {
  double sum = 0.0;
  for (const auto& atom : atoms_) sum += atom.w * atom.s;
  return sum;
}

double SpreadingProfile::second_moment_sphi() const {
  double sum = 0.0;
  for (const auto& atom : atoms_) sum += atom.w * atom.s * atom.phi;
  return sum;
}

double SpreadingProfile::basic_reproduction() const {
  return static_cast<double>(n0_) * second_moment_sphi();
}

double SpreadingProfile::max_susceptibility() const {
  return atoms_.back().s;
}

namespace {

SpreadingProfile build_homogeneous(const HomogeneousSpec& spec, count_t n0) {
  if (!(spec.sigma >= 0.0 && spec.sigma <= 1.0)) {
    throw std::invalid_argument("homogeneous sigma must be in [0, 1]");
  }
  if (!(spec.iota >= 0.0 && spec.iota <= 1.0)) {
    throw std::invalid_argument("homogeneous iota must be in [0, 1]");
  }
  return SpreadingProfile({{spec.sigma, spec.iota, 1.0}}, n0, Correlation::independent);
}

SpreadingProfile build_gamma(const GammaSpec& spec, count_t n0, count_t atom_count) {
  if (!(spec.shape > 0.0) || !std::isfinite(spec.shape)) {
    throw std::invalid_argument("gamma shape must be positive and finite");
  }
  if (spec.scale && (!(*spec.scale > 0.0) || !std::isfinite(*spec.scale))) {
    throw std::invalid_argument("gamma scale must be positive and finite");
  }
  if (atom_count < 1) throw std::invalid_argument("atom_count must be at least 1");
  if (spec.mode == Correlation::general) {
    throw std::invalid_argument("gamma correlation mode must be equal or independent");
  }

  const count_t m = atom_count;
  const boost::math::gamma_distribution<double> unit_gamma(spec.shape, 1.0);
  const double top_quantile =
      boost::math::quantile(unit_gamma, (static_cast<double>(m) - 0.5) / static_cast<double>(m));
  const double scale = spec.scale ? *spec.scale : 0.5 / top_quantile;

  std::vector<SpreadingAtom> atoms;
  atoms.reserve(m);
  const double mass = 1.0 / static_cast<double>(m);
  double clamped_mass = 0.0;
  for (count_t j = 0; j < m; ++j) {
    const double p = (static_cast<double>(j) + 0.5) / static_cast<double>(m);
    double value = scale * boost::math::quantile(unit_gamma, p);
    if (value > 1.0) {
      value = 1.0;
      clamped_mass += mass;
    }
    atoms.push_back({value, 0.0, mass});
  }
  if (clamped_mass > kMaxClampedMass) {
    std::ostringstream msg;
    msg << "gamma quantization clamped " << clamped_mass * 100.0
        << "% of probability mass to s=1; the scale is miscalibrated";
    throw std::invalid_argument(msg.str());
  }

  if (spec.mode == Correlation::equal) {
    for (auto& atom : atoms) atom.phi = atom.s;
  } else {
    double mean = 0.0;
    for (const auto& atom : atoms) mean += atom.w * atom.s;
    for (auto& atom : atoms) atom.phi = mean;
  }
  return SpreadingProfile(std::move(atoms), n0, spec.mode);
}

SpreadingProfile build_explicit(const ExplicitSpec& spec, count_t n0) {
  if (spec.atoms.empty()) throw std::invalid_argument("explicit atom list is empty");
  bool equal = true;
  for (const auto& atom : spec.atoms) {
    if (atom.phi != atom.s) {
      equal = false;
      break;
    }
  }
  return SpreadingProfile(spec.atoms, n0,
                          equal ? Correlation::equal : Correlation::general);
}

}  // namespace

SpreadingProfile build_profile(const ProfileSpec& spec) {
  if (spec.n0 < 1) throw std::invalid_argument("n0 must be at least 1");
  SpreadingProfile profile = std::visit(
      [&](const auto& family) -> SpreadingProfile {
        using T = std::decay_t<decltype(family)>;
        if constexpr (std::is_same_v<T, HomogeneousSpec>) {
          return build_homogeneous(family, spec.n0);
        } else if constexpr (std::is_same_v<T, GammaSpec>) {
          return build_gamma(family, spec.n0, spec.atom_count);
        } else {
          return build_explicit(family, spec.n0);
        }
      },
      spec.family);
  if (spec.target_r0) profile = calibrate_r0(profile, *spec.target_r0);
  return profile;
}

SpreadingProfile calibrate_r0(const SpreadingProfile& profile, double target_r0) {
  if (!(target_r0 > 0.0) || !std::isfinite(target_r0)) {
    throw std::invalid_argument("target_r0 must be positive and finite");
  }
  const double moment = profile.second_moment_sphi();
  if (!(moment > 0.0)) {
    throw std::invalid_argument("calibration requires an atom with s*phi > 0");
  }

  const double n0 = static_cast<double>(profile.n0());
  const double s_max = profile.max_susceptibility();
  const bool equal_mode = profile.correlation() == Correlation::equal;

  double factor;
  if (equal_mode) {
    factor = std::sqrt(target_r0 / (n0 * moment));
  } else {
    factor = target_r0 / (n0 * moment);
  }

  if (factor * s_max > 1.0) {
    const double cap = 1.0 / s_max;
    const double max_r0 = equal_mode ? n0 * cap * cap * moment : n0 * cap * moment;
    std::ostringstream msg;
    msg << "target_r0=" << target_r0 << " is not reachable with values in [0, 1];"
        << " maximal achievable R0 is " << max_r0;
    throw CalibrationError(msg.str(), max_r0);
  }

  std::vector<SpreadingAtom> atoms = profile.atoms();
  for (auto& atom : atoms) {
    atom.s *= factor;
    if (equal_mode) atom.phi = atom.s;
  }
  return SpreadingProfile(std::move(atoms), profile.n0(), profile.correlation());
}

}  // namespace rspread
