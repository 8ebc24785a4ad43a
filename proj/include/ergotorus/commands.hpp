#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ergotorus/config.hpp"

namespace ergotorus {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitBudget = 3;
inline constexpr int kExitCheck = 4;

/// "0.1.0+<git describe>".
std::string version_string();

const std::vector<std::string>& command_names();

struct CheckLine {
  std::string name;
  double value = 0.0;
  std::string relation;  // e.g. "<=", "<", "in"
  std::string threshold;
  bool pass = false;
};

struct CommandOutcome {
  std::string json;  // full report
  std::vector<std::pair<std::string, std::string>> csv;  // file name, contents
  std::vector<CheckLine> checks;
  bool all_pass() const;
};

/// Runs one command in memory. Throws Error on invalid input or budget
/// exhaustion.
CommandOutcome execute(const ExperimentConfig& config, std::string_view command);

struct RunOptions {
  std::string command;
  bool check = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

/// Executes, writes <out_dir>/<command>.json plus CSV files, prints one line
/// per check and maps failures to exit codes.
int run(ExperimentConfig config, const RunOptions& options, std::ostream& out,
        std::ostream& err);

}  // namespace ergotorus
