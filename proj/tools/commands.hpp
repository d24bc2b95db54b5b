#pragma once

#include "run_config.hpp"

namespace sasaki::cli {

/// Executes the configured subcommand and writes its artifacts under
/// cfg.out_dir. Returns the process exit status: 0 on success, 1 on solver
/// failure, 2 on check failure. Configuration problems throw ConfigError
/// (exit 64 in main).
int run(const RunConfig& cfg);

}  // namespace sasaki::cli
