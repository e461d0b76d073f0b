#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "artifact_check.hpp"
#include "exp_config.hpp"
#include "experiments.hpp"
#include "rspread/version.hpp"

namespace {

// Exit codes: 0 success, 1 usage or config error, 2 runtime error,
// 3 run succeeded but a diagnostic check failed.
enum ExitCode { kOk = 0, kUsage = 1, kRuntime = 2, kDiagnostics = 3 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rspread: heterogeneous spreading-process experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> decimate;

  CLI::App* run = app.add_subcommand("run", "Run an experiment from a config file");
  run->add_option("config", config_path, "JSON experiment config")->required();
  run->add_option("--seed", seed, "Override the config's base seed");
  run->add_option("--threads", threads, "Worker thread count (0 = all cores)");
  run->add_option("--out-dir", out_dir, "Override the config's output directory");
  run->add_option("--decimate", decimate, "Trajectory CSV row stride (0 = auto)");

  std::string artifact_dir;
  CLI::App* check = app.add_subcommand("check", "Re-validate trajectory artifacts");
  check->add_option("dir", artifact_dir, "Directory holding trajectory CSVs")->required();

  CLI::App* version = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error);
    return code == 0 ? kOk : kUsage;
  }

  if (version->parsed()) {
    std::cout << "rspread " << rspread::kVersion << "\n";
    return kOk;
  }

  if (run->parsed()) {
    rspread::tools::ExperimentConfig config;
    try {
      config = rspread::tools::load_config(config_path);
      if (seed) config.seed = *seed;
      if (threads) config.threads = *threads;
      if (out_dir) config.out_dir = *out_dir;
      if (decimate) config.decimate = *decimate;
      rspread::tools::validate_config(config);
    } catch (const rspread::tools::ConfigError& error) {
      std::cerr << "config error: " << error.what() << "\n";
      return kUsage;
    }
    try {
      const int status = rspread::tools::run_experiment(config);
      if (status == kDiagnostics) {
        std::cerr << "experiment completed but a diagnostic check failed\n";
      }
      return status;
    } catch (const std::exception& error) {
      std::cerr << "experiment '" << config.experiment << "' failed: " << error.what()
                << "\n";
      return kRuntime;
    }
  }

  if (check->parsed()) {
    try {
      const auto outcome = rspread::tools::check_artifacts(artifact_dir);
      std::cout << outcome.report.dump(2) << "\n";
      return outcome.pass ? kOk : kDiagnostics;
    } catch (const std::exception& error) {
      std::cerr << "check failed: " << error.what() << "\n";
      return kRuntime;
    }
  }

  return kUsage;
}
