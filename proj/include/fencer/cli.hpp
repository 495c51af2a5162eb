// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "fencer/strategies.hpp"

namespace fencer {

enum ExitCode : int { kExitOk = 0, kExitDiagnostics = 1, kExitCap = 2, kExitUncovered = 3 };

struct RunConfig {
  std::string input;
  Architecture arch = Architecture::TSO;
  Strategy strategy = Strategy::Musketeer;
  StrategyOptions options;
  bool export_only = false;  // --solver export-only
  std::string out;           // fenced program
  std::string dump_aeg, dump_cycles, dump_ilp;
  bool verify = false;
};

// analyze: writes the report to `out`, the fenced program and dumps to files.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// One CSV row per strategy after the header "strategy,arch,f,lwf,cf,dp,cost,ms".
int compare(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// dump: prints one artifact ("program", "aeg", "cycles", "ilp") to `out`.
int dump(const RunConfig& cfg, const std::string& what, std::ostream& out, std::ostream& err);

std::string format_cycles(const CycleResult& r, const Aeg& g);

// Parses argv and dispatches to the subcommands.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace fencer
