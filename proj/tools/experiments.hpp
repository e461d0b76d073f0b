#pragma once

#include "exp_config.hpp"

namespace rspread::tools {

/// Dispatches the configured experiment and writes its output files under
/// config.out_dir. Returns 0 when every diagnostic passed, 3 when the run
/// succeeded but a diagnostic check failed. Runtime failures propagate as
/// exceptions.
int run_experiment(const ExperimentConfig& config);

}  // namespace rspread::tools
