#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace optomech::cli {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitVerdict = 2 };

int cmd_plan(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_witness(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_decohere(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Full command line: parses, loads the config, dispatches, and maps every
/// failure to an exit code. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace optomech::cli
