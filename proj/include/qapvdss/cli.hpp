#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qapvdss/core.hpp"

namespace qapvdss::cli {

enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kParseError = 2,
  kConfigError = 3,
  kTargetUnreached = 4,
};

struct CliConfig {
  std::string subcommand;
  std::string instance_path;
  std::vector<std::string> solvers{"hybrid"};
  std::optional<std::uint64_t> seed;
  int runs = 1;
  std::optional<Cost> target;
  std::optional<Cost> normalizer;
  std::vector<int> depths{2, 5};
  long move_limit = 100000;
  std::string budget_unit = "moves";
  std::optional<long> rts_iterations;
  std::string output_path;
  std::string format = "json";
  int workers = 1;
  int max_attempts = 1000;
  // generate
  int n = 0;
  int max_entry = 99;
  // solve
  std::string start_path;
  // report
  std::vector<std::string> inputs;
  // scaling
  std::vector<int> sizes{60, 100, 200};
};

int cmd_solve(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_generate(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_ttt(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_report(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_scaling(const CliConfig& config, std::ostream& out, std::ostream& err);

/// Parses flags (and an optional --config file) and dispatches.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qapvdss::cli
