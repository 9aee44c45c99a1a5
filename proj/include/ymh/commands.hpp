#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ymh/config.hpp"

namespace ymh {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitInvalidConfig = 2,
  kExitNanAbort = 3,
};

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::vector<std::string> artifacts;  ///< file names relative to the output directory
  std::vector<CheckResult> checks;
};

/// Runs one validated command, writing CSV reports, snapshots and
/// `run_manifest.txt` into cfg.out. Progress lines go to `log`.
RunOutcome run_command(const RunConfig& cfg, std::ostream& log);

}  // namespace ymh
