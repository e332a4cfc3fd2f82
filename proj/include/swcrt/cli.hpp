#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "swcrt/config.hpp"

namespace swcrt {

struct CliOptions {
  std::string config_path;
  std::optional<std::string> out_dir;      // overrides output.directory
  std::optional<int> threads;              // overrides SWCRT_THREADS
  std::optional<std::uint64_t> seed;       // overrides mc.base_seed
  std::string data_path;                   // estimate command input
};

// Exit codes: 0 success, 2 validation, 3 compute, 4 I/O.
int run_command(Command command, const CliOptions& options);

void cmd_weights(const RunConfig& config);
void cmd_simulate(const RunConfig& config, int n_threads);
void cmd_estimate(const RunConfig& config, const std::string& data_path);
void cmd_design_info(const RunConfig& config);

int resolve_threads(const std::optional<int>& cli_threads);

}  // namespace swcrt
