#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "swcrt/correlation.hpp"
#include "swcrt/design.hpp"

namespace swcrt {

// One data-generating configuration: design geometry, true treatment-effect
// structure, period effects phi, variance components, and the base RNG seed.
struct ScenarioSpec {
  std::string name = "custom";
  DesignSpec design;
  TreatmentStructure structure = TreatmentStructure::immediate(0.0);
  Eigen::VectorXd period_effects;  // phi_j, length J
  CorrelationSpec correlation;
  std::uint64_t seed = 0;
};

void validate(const ScenarioSpec& scenario);

// Simulated outcomes for one trial. Individual outcomes are stored per cell
// (row = cluster-major cell, column = individual); cell_means is their exact
// arithmetic mean.
struct TrialData {
  Eigen::MatrixXd cell_means;   // I x J
  Eigen::MatrixXd individuals;  // (I*J) x K, cluster-major/period-minor rows
  int cell_size = 0;

  // Sum over cells of the within-cell squared deviations from the cell mean.
  double within_cell_ss() const;
};

// Fixed part of the cell mean: effect(q, j) + phi_j.
double cell_expectation(const ScenarioSpec& scenario, int q, int j);

// Y_ijk = effect(i,j) + phi_j + alpha_i + eps_ijk, with per-(seed, replicate,
// cluster) RNG substreams; identical inputs give bit-identical datasets.
TrialData simulate_trial(const ScenarioSpec& scenario, std::uint64_t replicate = 0);

// Unweighted mean of the effect vector over the full interval: theta for
// immediate, mean of delta over s=1..J-1, mean of xi over j=2..J-1.
double true_estimand(const TreatmentStructure& structure);
// Mean over an explicit index interval [lo, hi] (inclusive, paper indexing).
double true_estimand(const TreatmentStructure& structure, int lo, int hi);

// Section-5 presets: "sim1-immediate", "sim2-exposure", "sim3-calendar".
ScenarioSpec preset_scenario(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace swcrt
