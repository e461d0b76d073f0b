#include "rspread/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "rspread/parallel.hpp"
#include "rspread/rng.hpp"

namespace rspread {

namespace {

// Full re-summation period for the running susceptibility accumulator,
// bounding floating-point drift over long runs.
constexpr count_t kResyncInterval = 1u << 16;

/// Fenwick tree over per-node susceptibility supporting O(log n) weighted
/// sampling without replacement.
class FenwickSampler {
public:
  explicit FenwickSampler(const std::vector<SpreadingNode>& nodes)
      : values_(nodes.size()), tree_(nodes.size() + 1, 0.0) {
    for (std::size_t i = 0; i < nodes.size(); ++i) values_[i] = nodes[i].s;
    rebuild();
  }

  double total() const noexcept { return total_; }

  /// Smallest index whose cumulative susceptibility exceeds target.
  std::size_t sample(double unit) const {
    double target = unit * total_;
    std::size_t index = 0;
    std::size_t mask = top_bit_;
    while (mask != 0) {
      const std::size_t probe = index + mask;
      if (probe < tree_.size() && tree_[probe] <= target) {
        target -= tree_[probe];
        index = probe;
      }
      mask >>= 1;
    }
    // `index` is now the count of entries with cumulative sum <= target, so
    // the sampled node is at `index` (0-based). Skip any zero-weight nodes a
    // boundary landing may have selected.
    std::size_t node = index;
    while (node < values_.size() && values_[node] <= 0.0) ++node;
    if (node >= values_.size()) {
      node = values_.size();
      while (node > 0 && values_[node - 1] <= 0.0) --node;
      if (node == 0) throw std::logic_error("sampling from an empty pool");
      --node;
    }
    return node;
  }

  void remove(std::size_t node) {
    const double value = values_[node];
    values_[node] = 0.0;
    for (std::size_t i = node + 1; i < tree_.size(); i += i & (~i + 1)) {
      tree_[i] -= value;
    }
    total_ -= value;
  }

  void rebuild() {
    std::fill(tree_.begin(), tree_.end(), 0.0);
    for (std::size_t i = 1; i < tree_.size(); ++i) {
      tree_[i] += values_[i - 1];
      const std::size_t parent = i + (i & (~i + 1));
      if (parent < tree_.size()) tree_[parent] += tree_[i];
    }
    total_ = 0.0;
    for (const double v : values_) total_ += v;
    top_bit_ = 1;
    while ((top_bit_ << 1) < tree_.size()) top_bit_ <<= 1;
  }

private:
  std::vector<double> values_;
  std::vector<double> tree_;
  double total_ = 0.0;
  std::size_t top_bit_ = 1;
};

}  // namespace

Population::Population(std::vector<SpreadingNode> nodes) : nodes_(std::move(nodes)) {
  for (const auto& node : nodes_) {
    if (!(node.s >= 0.0 && node.s <= 1.0) || !(node.phi >= 0.0 && node.phi <= 1.0)) {
      throw std::invalid_argument("node spreading values must be in [0, 1]");
    }
    total_susceptibility_ += node.s;
  }
}

Population draw_population(const SpreadingProfile& profile, count_t seed) {
  if (profile.n0() < 2) {
    throw std::invalid_argument("population draw requires n0 >= 2");
  }
  const auto& atoms = profile.atoms();
  std::vector<double> cumulative(atoms.size());
  double running = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    running += atoms[i].w;
    cumulative[i] = running;
  }
  cumulative.back() = 1.0;

  PhiloxStream rng(seed, rng_stream::population_draw);
  std::vector<SpreadingNode> nodes;
  nodes.reserve(profile.n0());
  for (count_t i = 0; i < profile.n0(); ++i) {
    const double u = rng.next_unit();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t index = std::min<std::size_t>(
        static_cast<std::size_t>(it - cumulative.begin()), atoms.size() - 1);
    nodes.push_back({atoms[index].s, atoms[index].phi});
  }
  return Population(std::move(nodes));
}

SimulationTrace simulate(const Population& population, count_t max_steps, count_t seed) {
  if (max_steps > population.size()) {
    throw std::invalid_argument("max_steps cannot exceed the population size");
  }

  SimulationTrace trace;
  trace.seed = seed;
  trace.infection_order.reserve(max_steps);
  trace.r_hat.reserve(max_steps);

  PhiloxStream rng(seed, rng_stream::infection_order);
  FenwickSampler sampler(population.nodes());
  double alive_sum = population.total_susceptibility();
  count_t removals_since_resync = 0;

  const auto& nodes = population.nodes();
  for (count_t n = 0; n < max_steps; ++n) {
    if (sampler.total() <= 0.0) break;  // nobody left who can get infected
    const std::size_t infected = sampler.sample(rng.next_unit());
    const double s = nodes[infected].s;
    const double targets = std::max(0.0, alive_sum - s);
    trace.infection_order.push_back(static_cast<count_t>(infected));
    trace.r_hat.push_back(nodes[infected].phi * targets);

    sampler.remove(infected);
    alive_sum -= s;
    if (++removals_since_resync == kResyncInterval) {
      sampler.rebuild();
      alive_sum = sampler.total();
      removals_since_resync = 0;
    }
  }
  return trace;
}

namespace {

RCurveEstimate estimate_from_traces(count_t steps, count_t replicas, unsigned threads,
                                    const std::function<SimulationTrace(count_t)>& run) {
  if (replicas < 2) throw std::invalid_argument("estimate requires at least 2 replicas");

  std::vector<std::vector<double>> rows(replicas);
  parallel_for(replicas, threads, [&](std::size_t i) {
    rows[i] = run(static_cast<count_t>(i)).r_hat;
  });
  for (const auto& row : rows) {
    if (row.size() < steps) {
      throw std::runtime_error(
          "a replica halted before reaching the requested step count "
          "(susceptible pool ran out of susceptibility)");
    }
  }

  RCurveEstimate estimate;
  estimate.replicas = replicas;
  estimate.mean.assign(steps, 0.0);
  estimate.se.assign(steps, 0.0);

  // Indexed reduction in replica order keeps the result independent of the
  // thread count.
  for (count_t i = 0; i < replicas; ++i) {
    for (count_t n = 0; n < steps; ++n) estimate.mean[n] += rows[i][n];
  }
  const double inv = 1.0 / static_cast<double>(replicas);
  for (count_t n = 0; n < steps; ++n) estimate.mean[n] *= inv;
  for (count_t i = 0; i < replicas; ++i) {
    for (count_t n = 0; n < steps; ++n) {
      const double d = rows[i][n] - estimate.mean[n];
      estimate.se[n] += d * d;
    }
  }
  for (count_t n = 0; n < steps; ++n) {
    const double variance = estimate.se[n] / static_cast<double>(replicas - 1);
    estimate.se[n] = std::sqrt(variance / static_cast<double>(replicas));
  }
  return estimate;
}

}  // namespace

RCurveEstimate estimate_r_curve(const SpreadingProfile& profile, count_t steps,
                                count_t replicas, count_t base_seed, unsigned threads) {
  if (steps > profile.n0()) {
    throw std::invalid_argument("steps cannot exceed the population size");
  }
  return estimate_from_traces(steps, replicas, threads, [&](count_t i) {
    const Population population = draw_population(profile, base_seed + i);
    return simulate(population, steps, base_seed + i);
  });
}

RCurveEstimate estimate_r_curve(const Population& population, count_t steps,
                                count_t replicas, count_t base_seed, unsigned threads) {
  return estimate_from_traces(steps, replicas, threads, [&](count_t i) {
    return simulate(population, steps, base_seed + i);
  });
}

namespace {

double enumerate_prefixes(std::span<const SpreadingNode> nodes, count_t target_step,
                          unsigned mask, count_t depth, double probability,
                          double remaining_sum) {
  if (remaining_sum <= 0.0) return 0.0;

  const std::size_t count = nodes.size();
  double total = 0.0;
  if (depth == target_step) {
    for (std::size_t v = 0; v < count; ++v) {
      if (mask & (1u << v)) continue;
      const double pick = nodes[v].s / remaining_sum;
      const double targets = std::max(0.0, remaining_sum - nodes[v].s);
      total += probability * pick * nodes[v].phi * targets;
    }
    return total;
  }
  for (std::size_t v = 0; v < count; ++v) {
    if (mask & (1u << v)) continue;
    const double pick = nodes[v].s / remaining_sum;
    if (pick <= 0.0) continue;
    total += enumerate_prefixes(nodes, target_step, mask | (1u << v), depth + 1,
                                probability * pick, remaining_sum - nodes[v].s);
  }
  return total;
}

}  // namespace

double brute_force_r(std::span<const SpreadingNode> nodes, count_t n) {
  if (nodes.size() > 9) {
    throw std::invalid_argument("exhaustive enumeration is limited to 9 nodes");
  }
  if (n >= nodes.size()) {
    throw std::invalid_argument("step index must be below the node count");
  }
  double remaining_sum = 0.0;
  for (const auto& node : nodes) remaining_sum += node.s;
  return enumerate_prefixes(nodes, n, 0u, 0, 1.0, remaining_sum);
}

}  // namespace rspread
