#include <CLI11.hpp>
#include <cstdint>

#include "swcrt/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"stepped-wedge CRT treatment-effect analysis toolkit"};
  app.require_subcommand(1);

  swcrt::CliOptions opts;
  int threads = 0;
  std::uint64_t seed = 0;
  bool has_threads = false, has_seed = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "configuration file (JSON)")
        ->required();
    sub->add_option("--out", [&](const std::vector<std::string>& v) {
          opts.out_dir = v.front();
          return true;
        }, "output directory (overrides config)");
    sub->add_option("--threads", threads, "worker threads (or SWCRT_THREADS)")
        ->each([&](const std::string&) { has_threads = true; });
    sub->add_option("--seed", seed, "base seed override")
        ->each([&](const std::string&) { has_seed = true; });
  };

  CLI::App* weights = app.add_subcommand("weights", "estimand weight curve tables");
  add_common(weights);
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo study");
  add_common(simulate);
  CLI::App* estimate = app.add_subcommand("estimate", "fit models to a dataset");
  add_common(estimate);
  estimate->add_option("--data", opts.data_path, "trial data CSV")->required();
  CLI::App* info = app.add_subcommand("design-info", "describe the design");
  add_common(info);

  CLI11_PARSE(app, argc, argv);

  if (has_threads) opts.threads = threads;
  if (has_seed) opts.seed = seed;

  swcrt::Command cmd = swcrt::Command::Simulate;
  if (weights->parsed()) cmd = swcrt::Command::Weights;
  else if (simulate->parsed()) cmd = swcrt::Command::Simulate;
  else if (estimate->parsed()) cmd = swcrt::Command::Estimate;
  else if (info->parsed()) cmd = swcrt::Command::DesignInfo;

  return swcrt::run_command(cmd, opts);
}
