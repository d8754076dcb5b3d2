#pragma once

#include <CLI11.hpp>

#include "xga/harness.hpp"

namespace xga::cli {

/// Parses and runs the app; maps ConfigError to exit 2, NumericalError to 3.
int run_app(CLI::App& app, int argc, char** argv);

/// Accepts either a full experiment config or a bare world config (no nested
/// sections), which is wrapped as the "world" section of an otherwise default
/// experiment.
ExperimentConfig load_config_flexible(const std::string& path);

}  // namespace xga::cli
