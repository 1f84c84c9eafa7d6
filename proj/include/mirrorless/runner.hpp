#pragma once

// Workflow dispatch for the simulate tool.

#include "mirrorless/common.hpp"
#include "mirrorless/report.hpp"
#include "mirrorless/scenario.hpp"

#include <optional>
#include <ostream>

namespace mirrorless::cli {

enum ExitCode : int { kSuccess = 0, kInternalError = 1, kNumericalFailure = 2, kConfigError = 3 };

/// Runs the selected workflow. Rows follow grid order for either execution
/// policy. Throws ConfigError, std::invalid_argument or NumericalError.
report::ResultTable execute(const ScenarioConfig& config, Execution execution = Execution::Serial);

struct RunOptions {
    Execution execution = Execution::Serial;
    bool record_wall_time = true;
};

/// Executes, renders the table in config.format and writes it to `out` only
/// on success. Diagnostics go to `diag`. Returns an ExitCode.
int run(const ScenarioConfig& config, std::ostream& out, std::ostream& diag, const RunOptions& options = {});

} // namespace mirrorless::cli
