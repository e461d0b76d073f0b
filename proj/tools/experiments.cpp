#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "csv_io.hpp"
#include "reports.hpp"
#include "rspread/density.hpp"
#include "rspread/interventions.hpp"
#include "rspread/parallel.hpp"
#include "rspread/rng.hpp"
#include "rspread/simulate.hpp"

namespace rspread::tools {

namespace fs = std::filesystem;

namespace {

constexpr char kTrajectoryHeader[] = "n,R,remaining,mean_s";

SpreadingProfile gamma_profile(double shape, const std::string& mode, count_t n0,
                               double r0, count_t atom_count) {
  ProfileSpec spec;
  GammaSpec gamma;
  gamma.shape = shape;
  gamma.mode = mode == "independent" ? Correlation::independent : Correlation::equal;
  spec.family = gamma;
  spec.n0 = n0;
  spec.target_r0 = r0;
  spec.atom_count = atom_count;
  return build_profile(spec);
}

SpreadingProfile homogeneous_profile(count_t n0, double r0) {
  ProfileSpec spec;
  spec.family = HomogeneousSpec{0.5, 0.5};
  spec.n0 = n0;
  spec.target_r0 = r0;
  return build_profile(spec);
}

struct TrajectoryRun {
  RTrajectory trajectory;
  std::vector<std::string> csv_rows;  // decimated, final step always included
};

TrajectoryRun run_trajectory(const SpreadingProfile& profile, count_t overshoot,
                             count_t decimate) {
  TrajectoryRun run;
  std::string pending_last;
  count_t last_written = 0;
  bool any_written = false;
  TrajectoryOptions options;
  options.overshoot = overshoot;
  run.trajectory = r_trajectory(
      profile, options, [&](count_t n, double r, count_t remaining, double mean_s) {
        std::string row = std::to_string(n);
        row += ',';
        row += format_double(r);
        row += ',';
        row += std::to_string(remaining);
        row += ',';
        row += format_double(mean_s);
        if (n % decimate == 0) {
          run.csv_rows.push_back(std::move(row));
          last_written = n;
          any_written = true;
        } else {
          pending_last = std::move(row);
        }
      });
  const count_t final_step = run.trajectory.values.empty()
                                 ? 0
                                 : static_cast<count_t>(run.trajectory.values.size()) - 1;
  if (!pending_last.empty() && (!any_written || last_written < final_step)) {
    run.csv_rows.push_back(std::move(pending_last));
  }
  return run;
}

void write_trajectory_csv(const fs::path& path, const TrajectoryRun& run) {
  CsvWriter writer(path, kTrajectoryHeader);
  for (const auto& row : run.csv_rows) writer.raw_row(row);
}

/// Runs the per-trajectory diagnostics: convexity, monotone decay, the
/// susceptible-pool ratio bound, and the likelihood-ratio/dominance relation
/// on sampled consecutive state pairs.
void trajectory_diagnostics(const SpreadingProfile& profile, const RTrajectory& trajectory,
                            const std::string& subject, DiagnosticsReport& report) {
  report.add(subject, check_convexity(trajectory));
  report.add(subject, check_monotone_r(trajectory));

  const count_t last = static_cast<count_t>(trajectory.values.size()) - 1;
  if (last >= 2 && trajectory.n0 > last) {
    const count_t n1 = std::max<count_t>(1, last / 10);
    const count_t n2 = last;
    if (n1 < n2) report.add(subject, check_ratio_bound(trajectory, n1, n2));
  }

  if (last >= 1) {
    std::vector<count_t> steps;
    const count_t pairs = std::min<count_t>(8, last);
    for (count_t i = 0; i < pairs; ++i) {
      const count_t n = (last - 1) * i / pairs;
      steps.push_back(n);
      steps.push_back(n + 1);
    }
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    const auto states = trace_states(profile, steps);
    for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
      if (steps[i + 1] != steps[i] + 1) continue;
      report.add(subject, check_mlrp(states[i], states[i + 1]));
    }
  }
}

int run_trajectory_experiment(const ExperimentConfig& config) {
  const ProfileSpec spec =
      to_profile_spec(*config.profile, config.n0, config.r0, config.atom_count);
  const SpreadingProfile profile = build_profile(spec);
  const count_t decimate = effective_decimation(config);

  const TrajectoryRun run = run_trajectory(profile, config.overshoot, decimate);
  write_trajectory_csv(fs::path(config.out_dir) / "trajectory.csv", run);

  DiagnosticsReport report;
  trajectory_diagnostics(profile, run.trajectory, "trajectory", report);
  if (run.trajectory.hit_step) {
    report.note("hit_step", *run.trajectory.hit_step);
    report.note("hit_fraction", *run.trajectory.hit_fraction);
  }
  write_json_file(fs::path(config.out_dir) / "diagnostics.json", report.to_json());
  return report.overall_pass() ? 0 : 3;
}

int run_k_sweep(const ExperimentConfig& config) {
  const count_t decimate = effective_decimation(config);
  const std::size_t count = config.k_grid.size();

  std::vector<TrajectoryRun> runs(count);
  parallel_for(count, config.threads, [&](std::size_t i) {
    const SpreadingProfile profile = gamma_profile(config.k_grid[i], config.mode,
                                                   config.n0, config.r0, config.atom_count);
    runs[i] = run_trajectory(profile, config.overshoot, decimate);
  });

  DiagnosticsReport report;
  CsvWriter summary(fs::path(config.out_dir) / "hit_summary.csv", "k,hit_step,hit_fraction");
  for (std::size_t i = 0; i < count; ++i) {
    const std::string label = "k=" + format_double(config.k_grid[i]);
    write_trajectory_csv(
        fs::path(config.out_dir) / ("trajectory_k" + format_double(config.k_grid[i]) + ".csv"),
        runs[i]);
    const auto& trajectory = runs[i].trajectory;
    if (trajectory.hit_step) {
      summary.row(format_double(config.k_grid[i]), *trajectory.hit_step,
                  *trajectory.hit_fraction);
    } else {
      summary.row(format_double(config.k_grid[i]), std::string("none"), std::string("none"));
    }
    const SpreadingProfile profile = gamma_profile(config.k_grid[i], config.mode,
                                                   config.n0, config.r0, config.atom_count);
    trajectory_diagnostics(profile, trajectory, label, report);
  }
  write_json_file(fs::path(config.out_dir) / "diagnostics.json", report.to_json());
  return report.overall_pass() ? 0 : 3;
}

int run_mc_validate(const ExperimentConfig& config) {
  const ProfileSpec spec =
      to_profile_spec(*config.profile, config.n0, config.r0, config.atom_count);
  const SpreadingProfile profile = build_profile(spec);

  // Engine curve. When no step count is given the comparison covers the
  // natural range of the process, up to the herd-immunity step.
  RTrajectory trajectory;
  count_t steps = config.steps;
  if (steps == 0) {
    trajectory = r_trajectory(profile);
    steps = static_cast<count_t>(trajectory.values.size());
  } else {
    TrajectoryOptions options;
    options.overshoot = config.n0;  // do not stop at the threshold
    options.max_steps = steps - 1;
    trajectory = r_trajectory(profile, options);
  }

  const RCurveEstimate estimate =
      estimate_r_curve(profile, steps, config.replicas, config.seed, config.threads);

  CsvWriter curve(fs::path(config.out_dir) / "mc_curve.csv", "n,mean_r,stderr");
  for (count_t n = 0; n < steps; ++n) {
    curve.row(n, estimate.mean[n], estimate.se[n]);
  }

  const double base_tolerance = 0.02 * config.r0;
  double max_excess = -1e300;
  count_t worst = 0;
  const count_t compare = std::min<count_t>(steps, trajectory.values.size());
  CsvWriter comparison(fs::path(config.out_dir) / "mc_compare.csv",
                       "n,engine_r,mc_r,stderr,gap,tolerance");
  for (count_t n = 0; n < compare; ++n) {
    const double gap = std::abs(estimate.mean[n] - trajectory.values[n]);
    const double tolerance = base_tolerance + 3.0 * estimate.se[n];
    comparison.row(n, trajectory.values[n], estimate.mean[n], estimate.se[n], gap, tolerance);
    if (gap - tolerance > max_excess) {
      max_excess = gap - tolerance;
      worst = n;
    }
  }

  if (config.write_traces) {
    CsvWriter traces(fs::path(config.out_dir) / "traces.csv", "replica,n,r_hat");
    for (count_t i = 0; i < config.replicas; ++i) {
      const Population population = draw_population(profile, config.seed + i);
      const SimulationTrace trace = simulate(population, steps, config.seed + i);
      for (count_t n = 0; n < trace.r_hat.size(); ++n) {
        traces.row(i, n, trace.r_hat[n]);
      }
    }
  }

  const bool pass = max_excess <= 0.0;
  nlohmann::json report;
  report["overall_pass"] = pass;
  report["steps_compared"] = compare;
  report["replicas"] = config.replicas;
  report["max_gap_minus_tolerance"] = max_excess;
  report["worst_step"] = worst;
  report["tolerance"] = "0.02*r0 + 3*stderr";
  write_json_file(fs::path(config.out_dir) / "mc_report.json", report);
  return pass ? 0 : 3;
}

struct OracleInstance {
  std::vector<SpreadingNode> nodes;
  std::vector<double> r_exact;
  std::vector<double> r_engine;       // NaN where the recursion declined
  std::vector<double> bound;          // relative error scale max(s)/T
  RCurveEstimate estimate;
  bool engine_ok = true;
  bool mc_ok = true;
};

std::vector<SpreadingNode> random_monotone_nodes(count_t seed, count_t instance,
                                                 count_t max_nodes) {
  PhiloxStream rng(seed + instance, rng_stream::instance_generation);
  const count_t count = 3 + static_cast<count_t>(rng.next_u64() % (max_nodes - 2));
  std::vector<double> s(count), phi(count);
  for (auto& value : s) value = 0.05 + 0.55 * rng.next_unit();
  std::sort(s.begin(), s.end());
  const bool equal_mode = (instance % 2) == 0;
  if (equal_mode) {
    phi = s;
  } else {
    for (auto& value : phi) value = 0.05 + 0.85 * rng.next_unit();
    std::sort(phi.begin(), phi.end());
  }
  std::vector<SpreadingNode> nodes(count);
  for (count_t i = 0; i < count; ++i) nodes[i] = {s[i], phi[i]};
  return nodes;
}

OracleInstance run_oracle_instance(const std::vector<SpreadingNode>& nodes,
                                   count_t replicas, count_t seed, unsigned threads) {
  OracleInstance instance;
  instance.nodes = nodes;
  const count_t count = static_cast<count_t>(nodes.size());

  for (count_t n = 0; n < count; ++n) {
    instance.r_exact.push_back(brute_force_r(nodes, n));
  }

  // Engine view of the same population: one equal-mass atom per node.
  std::vector<SpreadingAtom> atoms;
  for (const auto& node : nodes) {
    atoms.push_back({node.s, node.phi, 1.0 / static_cast<double>(count)});
  }
  const SpreadingProfile profile(std::move(atoms), count);
  const double s_max = profile.max_susceptibility();

  DensityEvolver evolver(profile);
  instance.r_engine.assign(count, std::numeric_limits<double>::quiet_NaN());
  instance.bound.assign(count, std::numeric_limits<double>::quiet_NaN());
  for (count_t n = 0; n < count; ++n) {
    instance.r_engine[n] = evolver.reproduction();
    instance.bound[n] = s_max / evolver.total_susceptibility();
    const double gap = std::abs(instance.r_engine[n] - instance.r_exact[n]);
    if (gap > instance.bound[n] * instance.r_engine[n] + 1e-12) {
      instance.engine_ok = false;
    }
    if (n + 1 == count) break;
    if (!evolver.can_advance()) break;
    try {
      evolver.advance();
    } catch (const std::domain_error&) {
      break;  // a node dominates the residual pool; later steps are undefined
    }
  }

  const Population population(nodes);
  instance.estimate = estimate_r_curve(population, count, replicas, seed, threads);
  for (count_t n = 0; n < count; ++n) {
    const double gap = std::abs(instance.estimate.mean[n] - instance.r_exact[n]);
    if (gap > 4.0 * instance.estimate.se[n] + 1e-12) instance.mc_ok = false;
  }
  return instance;
}

int run_oracle_validate(const ExperimentConfig& config) {
  std::vector<OracleInstance> instances(config.instances);
  parallel_for(config.instances, config.threads, [&](std::size_t i) {
    const auto nodes = random_monotone_nodes(config.seed, static_cast<count_t>(i),
                                             config.max_nodes);
    // Disjoint replica seed ranges per instance.
    const count_t seed_base = config.seed + (static_cast<count_t>(i) + 1) * 10000000;
    instances[i] = run_oracle_instance(nodes, config.replicas, seed_base, /*threads=*/1);
  });

  CsvWriter results(fs::path(config.out_dir) / "oracle_results.csv",
                    "instance,n,r_exact,r_engine,r_mc,stderr,bound,engine_pass,mc_pass");
  bool pass = true;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& instance = instances[i];
    pass = pass && instance.engine_ok && instance.mc_ok;
    for (std::size_t n = 0; n < instance.r_exact.size(); ++n) {
      results.row(static_cast<count_t>(i), static_cast<count_t>(n), instance.r_exact[n],
                  instance.r_engine[n], instance.estimate.mean[n], instance.estimate.se[n],
                  instance.bound[n], count_t{instance.engine_ok ? 1u : 0u},
                  count_t{instance.mc_ok ? 1u : 0u});
    }
  }

  nlohmann::json report;
  report["overall_pass"] = pass;
  report["instances"] = config.instances;
  report["replicas"] = config.replicas;
  write_json_file(fs::path(config.out_dir) / "oracle_report.json", report);
  return pass ? 0 : 3;
}

void write_plan_csv(const fs::path& path, const std::vector<std::string>& names,
                    const AllocationPlan& plan) {
  CsvWriter writer(path, "region,vaccines,predicted_infections");
  for (std::size_t r = 0; r < names.size(); ++r) {
    writer.row(names[r], plan.vaccines[r], plan.predicted_infections[r]);
  }
  writer.row(std::string("total"), plan.total_vaccines(), plan.total_infections());
}

struct AllocationCell {
  AllocationPlan accounting;
  AllocationPlan oblivious;
};

int run_allocation(const ExperimentConfig& config) {
  const fs::path out_dir(config.out_dir);

  if (!config.regions.empty()) {
    // Explicit region list: one plan pair per supply level.
    std::vector<Region> regions;
    std::vector<std::string> names;
    for (const auto& entry : config.regions) {
      std::optional<double> target;
      if (entry.r0 > 0.0) target = entry.r0;
      const ProfileSpec spec =
          to_profile_spec(entry.profile, entry.n0, target, config.atom_count);
      regions.emplace_back(entry.name, build_profile(spec));
      names.push_back(entry.name);
    }
    VaccineAllocator allocator(regions, config.vacc_step);
    bool pass = true;
    for (const count_t supply : config.supplies) {
      const AllocationPlan accounting = allocator.accounting(supply, config.granularity);
      const AllocationPlan oblivious = allocator.oblivious(supply, config.granularity);
      pass = pass && accounting.total_infections() <= oblivious.total_infections();
      write_plan_csv(out_dir / ("plan_s" + std::to_string(supply) + "_accounting.csv"),
                     names, accounting);
      write_plan_csv(out_dir / ("plan_s" + std::to_string(supply) + "_oblivious.csv"),
                     names, oblivious);
    }
    nlohmann::json report;
    report["overall_pass"] = pass;
    write_json_file(out_dir / "allocation_report.json", report);
    return pass ? 0 : 3;
  }

  // Bi-regional heterogeneity sweep: one homogeneous region and one gamma
  // region sharing n0 and R0, across the k grid and supply levels.
  std::vector<double> grid = config.k_grid;
  std::sort(grid.begin(), grid.end(), std::greater<>());  // ascending 1/k

  std::vector<std::vector<AllocationCell>> cells(grid.size());
  parallel_for(grid.size(), config.threads, [&](std::size_t i) {
    const double k = grid[i];
    std::vector<Region> regions;
    regions.emplace_back("homogeneous", homogeneous_profile(config.n0, config.r0));
    regions.emplace_back("gamma", gamma_profile(k, config.mode, config.n0, config.r0,
                                                config.atom_count));
    VaccineAllocator allocator(std::move(regions), config.vacc_step);
    for (const count_t supply : config.supplies) {
      AllocationCell cell;
      cell.accounting = allocator.accounting(supply, config.granularity);
      cell.oblivious = allocator.oblivious(supply, config.granularity);
      cells[i].push_back(std::move(cell));
    }
  });

  std::string header_a = "inv_k";
  std::string header_b = "inv_k";
  for (const count_t supply : config.supplies) {
    header_a += ",accounting_" + std::to_string(supply);
    header_a += ",oblivious_" + std::to_string(supply);
    header_b += ",reldiff_" + std::to_string(supply);
  }
  CsvWriter fig_a(out_dir / "allocation_totals.csv", header_a);
  CsvWriter fig_b(out_dir / "allocation_reldiff.csv", header_b);

  bool pass = true;
  nlohmann::json details = nlohmann::json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::string row_a = format_double(1.0 / grid[i]);
    std::string row_b = format_double(1.0 / grid[i]);
    for (std::size_t s = 0; s < config.supplies.size(); ++s) {
      const auto& cell = cells[i][s];
      const count_t accounting = cell.accounting.total_infections();
      const count_t oblivious = cell.oblivious.total_infections();
      pass = pass && accounting <= oblivious;
      const double reldiff =
          oblivious == 0 ? 0.0
                         : (static_cast<double>(oblivious) - static_cast<double>(accounting)) /
                               static_cast<double>(oblivious);
      row_a += ',' + std::to_string(accounting) + ',' + std::to_string(oblivious);
      row_b += ',' + format_double(reldiff);

      nlohmann::json entry;
      entry["k"] = grid[i];
      entry["supply"] = config.supplies[s];
      entry["accounting_total"] = accounting;
      entry["oblivious_total"] = oblivious;
      entry["relative_difference"] = reldiff;
      entry["convexity_verified"] = cells[i][s].accounting.convexity_verified;
      entry["exhaustive_fallback"] = cells[i][s].accounting.exhaustive_fallback;
      details.push_back(entry);

      const std::string stem = "plan_k" + format_double(grid[i]) + "_s" +
                               std::to_string(config.supplies[s]);
      const std::vector<std::string> names = {"homogeneous", "gamma"};
      write_plan_csv(out_dir / (stem + "_accounting.csv"), names, cell.accounting);
      write_plan_csv(out_dir / (stem + "_oblivious.csv"), names, cell.oblivious);
    }
    fig_a.raw_row(row_a);
    fig_b.raw_row(row_b);
  }

  nlohmann::json report;
  report["overall_pass"] = pass;
  report["cells"] = details;
  write_json_file(out_dir / "allocation_report.json", report);
  return pass ? 0 : 3;
}

int run_timing_sweep(const ExperimentConfig& config) {
  const fs::path out_dir(config.out_dir);
  std::vector<TimingSweepResult> results(config.k_grid.size());
  parallel_for(config.k_grid.size(), config.threads, [&](std::size_t i) {
    const Region region("gamma", gamma_profile(config.k_grid[i], config.mode, config.n0,
                                               config.r0, config.atom_count));
    results[i] = timing_sweep(region, config.vaccines, config.timings);
  });

  bool pass = true;
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < config.k_grid.size(); ++i) {
    CsvWriter sweep(out_dir / ("timing_k" + format_double(config.k_grid[i]) + ".csv"),
                    "param,cost");
    for (std::size_t t = 0; t < results[i].timings.size(); ++t) {
      sweep.row(results[i].timings[t], results[i].costs[t]);
    }
    pass = pass && results[i].monotone;
    nlohmann::json entry;
    entry["k"] = config.k_grid[i];
    entry["monotone"] = results[i].monotone;
    entry["spread"] = results[i].spread();
    entries.push_back(entry);
  }

  nlohmann::json report;
  report["overall_pass"] = pass;
  report["sweeps"] = entries;
  write_json_file(out_dir / "timing_report.json", report);
  return pass ? 0 : 3;
}

}  // namespace

int run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  fs::create_directories(config.out_dir);

  if (config.experiment == "trajectory") return run_trajectory_experiment(config);
  if (config.experiment == "k_sweep") return run_k_sweep(config);
  if (config.experiment == "mc_validate") return run_mc_validate(config);
  if (config.experiment == "oracle_validate") return run_oracle_validate(config);
  if (config.experiment == "allocation") return run_allocation(config);
  if (config.experiment == "timing_sweep") return run_timing_sweep(config);
  throw ConfigError("experiment", "unknown experiment kind");
}

}  // namespace rspread::tools
