#include "rspread/density.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rspread {

namespace {

constexpr double kMlrpMassFloor = 1e-15;

void require_grid_match(const PopulationState& state, const SpreadingProfile& profile) {
  if (state.weights.size() != profile.atoms().size()) {
    throw std::invalid_argument("state weights do not match the profile's atom grid");
  }
}

[[noreturn]] void throw_dominated_pool(double s, double total) {
  std::ostringstream msg;
  msg << "atom with susceptibility " << s << " exceeds the pool's total susceptibility "
      << total << "; a single individual dominates the remaining pool";
  throw std::domain_error(msg.str());
}

}  // namespace

PopulationState initial_state(const SpreadingProfile& profile) {
  PopulationState state;
  state.step = 0;
  state.remaining = profile.n0();
  state.weights.reserve(profile.atoms().size());
  for (const auto& atom : profile.atoms()) state.weights.push_back(atom.w);
  return state;
}

PopulationState step_density(const PopulationState& state, const SpreadingProfile& profile) {
  require_grid_match(state, profile);
  if (state.remaining < 2) {
    throw std::invalid_argument("step_density requires at least 2 susceptible individuals");
  }

  const auto& atoms = profile.atoms();
  double mean_s = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) mean_s += state.weights[i] * atoms[i].s;
  const double total = static_cast<double>(state.remaining) * mean_s;
  if (!(total > 0.0)) {
    throw std::domain_error("total susceptibility is zero; nobody left to infect");
  }

  PopulationState next;
  next.step = state.step + 1;
  next.remaining = state.remaining - 1;
  next.weights.resize(state.weights.size());

  const double inv_total = 1.0 / total;
  double mass = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double survive = 1.0 - atoms[i].s * inv_total;
    if (survive < 0.0 && state.weights[i] > 0.0) {
      throw_dominated_pool(atoms[i].s, total);
    }
    const double w = state.weights[i] * survive;
    next.weights[i] = w;
    mass += w;
  }
  for (auto& w : next.weights) w /= mass;
  return next;
}

double reproduction_number(const PopulationState& state, const SpreadingProfile& profile) {
  require_grid_match(state, profile);
  const auto& atoms = profile.atoms();
  double moment = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    moment += state.weights[i] * atoms[i].s * atoms[i].phi;
  }
  return static_cast<double>(state.remaining) * moment;
}

DensityEvolver::DensityEvolver(const SpreadingProfile& profile) : profile_(&profile) {
  const auto& atoms = profile.atoms();
  s_.reserve(atoms.size());
  sphi_.reserve(atoms.size());
  w_.reserve(atoms.size());
  for (const auto& atom : atoms) {
    s_.push_back(atom.s);
    sphi_.push_back(atom.s * atom.phi);
    w_.push_back(atom.w);
  }
  mass_ = 0.0;
  m1_ = 0.0;
  m2_ = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    mass_ += w_[i];
    m1_ += w_[i] * s_[i];
    m2_ += w_[i] * sphi_[i];
  }
  remaining_ = profile.n0();
  top_alive_ = static_cast<std::ptrdiff_t>(w_.size()) - 1;
}

void DensityEvolver::advance() {
  if (remaining_ < 2) {
    throw std::invalid_argument("advance requires at least 2 susceptible individuals");
  }
  const double total = static_cast<double>(remaining_) * (m1_ / mass_);
  if (!(total > 0.0)) {
    throw std::domain_error("total susceptibility is zero; nobody left to infect");
  }
  while (top_alive_ > 0 && w_[top_alive_] <= 0.0) --top_alive_;
  if (s_[top_alive_] > total && w_[top_alive_] > 0.0) {
    throw_dominated_pool(s_[top_alive_], total);
  }

  const double inv_total = 1.0 / total;
  double mass = 0.0, m1 = 0.0, m2 = 0.0;
  const std::size_t count = w_.size();
  for (std::size_t i = 0; i < count; ++i) {
    const double w = w_[i] * (1.0 - s_[i] * inv_total);
    w_[i] = w;
    mass += w;
    m1 += w * s_[i];
    m2 += w * sphi_[i];
  }
  mass_ = mass;
  m1_ = m1;
  m2_ = m2;
  ++step_;
  --remaining_;
}

void DensityEvolver::vaccinate(count_t count) {
  if (remaining_ < 1 || count > remaining_ - 1) {
    std::ostringstream msg;
    msg << "cannot vaccinate " << count << " of " << remaining_
        << " susceptible individuals; at least one must remain";
    throw std::invalid_argument(msg.str());
  }
  remaining_ -= count;
}

PopulationState DensityEvolver::state() const {
  PopulationState state;
  state.step = step_;
  state.remaining = remaining_;
  state.weights.resize(w_.size());
  for (std::size_t i = 0; i < w_.size(); ++i) state.weights[i] = w_[i] / mass_;
  return state;
}

std::vector<double> RTrajectory::first_differences() const {
  std::vector<double> diffs;
  if (values.size() < 2) return diffs;
  diffs.reserve(values.size() - 1);
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    diffs.push_back(values[i] - values[i + 1]);
  }
  return diffs;
}

RTrajectory r_trajectory(const SpreadingProfile& profile, const TrajectoryOptions& options,
                         const StepObserver& observer) {
  RTrajectory trajectory;
  trajectory.n0 = profile.n0();

  DensityEvolver evolver(profile);
  const count_t cap = options.max_steps == 0 ? profile.n0() : options.max_steps;
  for (;;) {
    const double r = evolver.reproduction();
    trajectory.values.push_back(r);
    if (observer) {
      observer(evolver.step(), r, evolver.remaining(), evolver.mean_susceptibility());
    }
    if (!trajectory.hit_step && r < 1.0 + kHitTolerance) {
      trajectory.hit_step = evolver.step();
      trajectory.hit_fraction =
          static_cast<double>(evolver.step()) / static_cast<double>(profile.n0());
    }
    if (trajectory.hit_step && evolver.step() >= *trajectory.hit_step + options.overshoot) break;
    if (evolver.step() >= cap) break;
    if (!evolver.can_advance()) break;
    evolver.advance();
  }
  return trajectory;
}

std::vector<PopulationState> trace_states(const SpreadingProfile& profile,
                                          std::span<const count_t> steps) {
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i] <= steps[i - 1]) {
      throw std::invalid_argument("trace_states expects strictly increasing steps");
    }
  }
  std::vector<PopulationState> states;
  states.reserve(steps.size());
  if (steps.empty()) return states;

  DensityEvolver evolver(profile);
  for (const count_t target : steps) {
    while (evolver.step() < target) {
      if (!evolver.can_advance()) {
        throw std::out_of_range("requested step is beyond pool exhaustion");
      }
      evolver.advance();
    }
    states.push_back(evolver.state());
  }
  return states;
}

CheckReport check_convexity(const RTrajectory& trajectory, double tolerance) {
  if (trajectory.values.size() < 3) {
    throw std::invalid_argument("convexity check requires at least 3 values");
  }
  CheckReport report;
  report.check = "convexity";
  report.tolerance = tolerance;
  const auto& r = trajectory.values;
  for (std::size_t n = 0; n + 2 < r.size(); ++n) {
    const double violation = (r[n + 1] - r[n + 2]) - (r[n] - r[n + 1]);
    if (violation > report.max_violation) {
      report.max_violation = violation;
      report.location = n;
    }
  }
  report.passed = report.max_violation <= tolerance;
  if (!report.passed) {
    std::ostringstream msg;
    msg << "second difference rises by " << report.max_violation << " at n="
        << report.location.value();
    report.detail = msg.str();
  }
  return report;
}

CheckReport check_monotone_r(const RTrajectory& trajectory, double tolerance) {
  CheckReport report;
  report.check = "monotone_r";
  report.tolerance = tolerance;
  const auto& r = trajectory.values;
  for (std::size_t n = 0; n + 1 < r.size(); ++n) {
    const double violation = r[n + 1] - r[n];
    if (violation > report.max_violation) {
      report.max_violation = violation;
      report.location = n;
    }
  }
  report.passed = report.max_violation <= tolerance;
  return report;
}

CheckReport check_mlrp(const PopulationState& a, const PopulationState& b, double tolerance) {
  if (a.weights.size() != b.weights.size()) {
    throw std::invalid_argument("states live on different atom grids");
  }
  CheckReport report;
  report.check = "mlrp";
  report.tolerance = tolerance;

  // Likelihood ratio w_a/w_b must be non-decreasing along the grid.
  double previous = 0.0;
  bool have_previous = false;
  std::size_t previous_index = 0;
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    if (a.weights[i] <= kMlrpMassFloor || b.weights[i] <= kMlrpMassFloor) continue;
    const double ratio = a.weights[i] / b.weights[i];
    if (have_previous) {
      const double violation = (previous - ratio) / std::max(1.0, previous);
      if (violation > report.max_violation) {
        report.max_violation = violation;
        report.location = previous_index;
      }
    }
    previous = ratio;
    previous_index = i;
    have_previous = true;
  }

  // First-order stochastic dominance: CDF of a stays at or below CDF of b.
  double cdf_a = 0.0, cdf_b = 0.0;
  for (std::size_t i = 0; i + 1 < a.weights.size(); ++i) {
    cdf_a += a.weights[i];
    cdf_b += b.weights[i];
    const double violation = cdf_a - cdf_b;
    if (violation > report.max_violation) {
      report.max_violation = violation;
      report.location = i;
    }
  }

  report.passed = report.max_violation <= tolerance;
  if (!report.passed) {
    std::ostringstream msg;
    msg << "likelihood ratio or dominance violated by " << report.max_violation
        << " near atom " << report.location.value();
    report.detail = msg.str();
  }
  return report;
}

CheckReport check_ratio_bound(const RTrajectory& trajectory, count_t n1, count_t n2,
                              double tolerance) {
  if (!(n1 > 0 && n1 < n2 && n2 < trajectory.n0)) {
    throw std::invalid_argument("ratio bound requires 0 < n1 < n2 < n0");
  }
  if (n2 >= trajectory.values.size()) {
    throw std::out_of_range("n2 is outside the computed trajectory");
  }
  CheckReport report;
  report.check = "ratio_bound";
  report.tolerance = tolerance;
  report.location = n2;

  const double r1 = trajectory.values[static_cast<std::size_t>(n1)];
  const double r2 = trajectory.values[static_cast<std::size_t>(n2)];
  const double pool_ratio = static_cast<double>(trajectory.n0 - n2) /
                            static_cast<double>(trajectory.n0 - n1);
  if (r1 > 0.0) {
    report.max_violation = r2 / r1 - pool_ratio;
  }
  report.passed = report.max_violation <= tolerance;
  if (!report.passed) {
    std::ostringstream msg;
    msg << "R(" << n2 << ")/R(" << n1 << ") exceeds the susceptible-pool ratio by "
        << report.max_violation;
    report.detail = msg.str();
  }
  return report;
}

}  // namespace rspread
