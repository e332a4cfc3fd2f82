#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swcrt/dgp.hpp"
#include "swcrt/mc.hpp"
#include "swcrt/weights.hpp"

namespace swcrt {

enum class Command { Weights, Simulate, Estimate, DesignInfo };

std::string command_name(Command c);
Command command_from_name(const std::string& name);

struct AnalysisConfig {
  std::vector<Structure> structures = {Structure::Immediate,
                                       Structure::ExposureVarying,
                                       Structure::CalendarVarying};
  std::vector<CorrelationKind> correlations = {CorrelationKind::Exchangeable,
                                               CorrelationKind::Independence};
  std::vector<VarianceMethod> variance_methods = {VarianceMethod::ModelBased,
                                                  VarianceMethod::CR2,
                                                  VarianceMethod::CR3};
  GammaPolicy gamma_policy = GammaPolicy::RemlPooled;
  double fixed_gamma = 0.0;

  std::vector<AnalysisSpec> expand() const;  // structures x correlations
};

struct WeightsConfig {
  std::vector<WeightFamily> families = {WeightFamily::W1, WeightFamily::W2,
                                        WeightFamily::W3, WeightFamily::W4};
  std::vector<int> q_list = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  std::vector<double> gamma_list = {0.0, 0.3, 0.6, 0.9};
};

struct OutputConfig {
  std::string directory = "out";
  bool csv = true;
  bool svg = true;
};

struct RunConfig {
  Command command = Command::Simulate;
  std::optional<DesignSpec> design;
  std::optional<ScenarioSpec> scenario;
  std::optional<std::string> scenario_preset;  // set when the scenario came from a preset
  AnalysisConfig analysis;
  int n_reps = 1000;
  std::uint64_t base_seed = 20240101;
  WeightsConfig weights;
  OutputConfig output;
};

bool operator==(const RunConfig& a, const RunConfig& b);

// Parses and fully validates a JSON configuration document. cli_command, when
// given, overrides/validates the optional "command" field.
RunConfig parse_config(const std::string& text,
                       std::optional<Command> cli_command = std::nullopt);
RunConfig load_config(const std::string& path,
                      std::optional<Command> cli_command = std::nullopt);

std::string serialize(const RunConfig& config);

}  // namespace swcrt
