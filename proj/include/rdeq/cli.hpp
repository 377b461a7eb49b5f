#pragma once

// Command front end. Every command turns a config into a JSON report record
// plus named data files; run_cli() handles argument parsing and file output.

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdeq/config.hpp"

namespace rdeq {

inline constexpr const char* kToolName = "rdeq";
inline constexpr const char* kToolVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidInput = 1;
inline constexpr int kExitAnalysisFailure = 2;

struct CommandOutput {
  int exit_code = kExitOk;
  nlohmann::json report;
  /// File name (relative to the output directory) -> contents.
  std::map<std::string, std::string> files;
  /// Table printed instead of the report under --format csv.
  std::string csv;
};

CommandOutput cmd_simulate(const AnalysisConfig& cfg);
CommandOutput cmd_certify(const AnalysisConfig& cfg);
CommandOutput cmd_equilibria(const AnalysisConfig& cfg);
CommandOutput cmd_stability(const AnalysisConfig& cfg);
CommandOutput cmd_report(const AnalysisConfig& cfg);

/// args excludes the program name. Returns 0, 1 or 2.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rdeq
