#pragma once

#include <string>
#include <vector>

#include "dnflow/config.hpp"
#include "dnflow/error.hpp"

namespace dnflow
{
/// Process exit codes of the batch front-end.
enum ExitCode : int
{
  kExitOk = 0,
  kExitOther = 1,
  kExitParse = 2,
  kExitSolver = 3,
  kExitCondition = 4,
  kExitIo = 5
};

int exit_code_for(ErrorCode code);

struct RunResult
{
  int exit_code = kExitOk;
  std::string run_dir;
  std::string message;
  std::vector<std::string> artifacts;  // file names inside run_dir
};

/// Executes cfg.command and writes its artifacts into
/// <cfg.directory>/<cfg.run_id>. Refuses a run directory that already holds
/// a summary or error record. Failures are reported through the exit code
/// and an error.json artifact; nothing is thrown.
RunResult run_command(const RunConfig& cfg,
                      const std::vector<std::string>& defaults = {});

/// Writes plot.gp (gnuplot) into `run_dir` for the artifacts found there and
/// returns its path. Throws IoError listing the expected files when any is
/// missing.
std::string emit_plot_script(const std::string& run_dir);

}  // namespace dnflow
