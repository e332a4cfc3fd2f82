#include "swcrt/dgp.hpp"

#include <cmath>

#include "swcrt/rng.hpp"

namespace swcrt {

void validate(const ScenarioSpec& scenario) {
  const int J = scenario.design.n_periods;
  if (J < 3) throw DegenerateDesign("scenario design needs J >= 3");
  if (scenario.period_effects.size() != J)
    throw DimensionMismatch("period_effects has length " +
                            std::to_string(scenario.period_effects.size()) +
                            ", expected J=" + std::to_string(J));
  switch (scenario.structure.kind()) {
    case Structure::Immediate:
      break;
    case Structure::ExposureVarying:
      if (scenario.structure.delta().size() != J - 1)
        throw DimensionMismatch("delta must have J-1 entries");
      break;
    case Structure::CalendarVarying:
      if (scenario.structure.xi().size() != J - 2)
        throw DimensionMismatch("xi must have J-2 entries");
      break;
  }
  validate(scenario.correlation);
}

double TrialData::within_cell_ss() const {
  double ss = 0.0;
  for (Eigen::Index r = 0; r < individuals.rows(); ++r) {
    const double m = individuals.row(r).mean();
    ss += (individuals.row(r).array() - m).square().sum();
  }
  return ss;
}

double cell_expectation(const ScenarioSpec& scenario, int q, int j) {
  const int J = scenario.design.n_periods;
  if (q < 1 || q > scenario.design.n_sequences || j < 1 || j > J)
    throw IndexOutOfRange("cell (" + std::to_string(q) + "," + std::to_string(j) + ")");
  return scenario.structure.effect_at(q, j, J) + scenario.period_effects[j - 1];
}

TrialData simulate_trial(const ScenarioSpec& scenario, std::uint64_t replicate) {
  validate(scenario);
  const int I = scenario.design.n_clusters;
  const int J = scenario.design.n_periods;
  const int K = scenario.design.cell_size;
  const double sd_alpha = std::sqrt(scenario.correlation.tau_alpha_sq);
  const double sd_eps = std::sqrt(scenario.correlation.sigma_e_sq);

  TrialData data;
  data.cell_size = K;
  data.individuals.resize(I * J, K);
  data.cell_means.resize(I, J);

  for (int c = 1; c <= I; ++c) {
    NormalSampler rng(stream_seed(scenario.seed, replicate, c));
    const double alpha = sd_alpha * rng();
    const int q = sequence_of_cluster(scenario.design, c);
    for (int j = 1; j <= J; ++j) {
      const double fixed = cell_expectation(scenario, q, j) + alpha;
      const int r = (c - 1) * J + (j - 1);
      for (int k = 0; k < K; ++k) data.individuals(r, k) = fixed + sd_eps * rng();
      data.cell_means(c - 1, j - 1) = data.individuals.row(r).mean();
    }
  }
  return data;
}

double true_estimand(const TreatmentStructure& structure) {
  switch (structure.kind()) {
    case Structure::Immediate:
      return structure.theta();
    case Structure::ExposureVarying:
      return structure.delta().mean();
    case Structure::CalendarVarying:
      return structure.xi().mean();
  }
  throw WrongStructure("unreachable");
}

double true_estimand(const TreatmentStructure& structure, int lo, int hi) {
  if (lo > hi) throw IndexOutOfRange("empty estimand interval");
  switch (structure.kind()) {
    case Structure::Immediate:
      return structure.theta();
    case Structure::ExposureVarying: {
      if (lo < 1 || hi > structure.delta().size())
        throw IndexOutOfRange("ETATE interval outside s=1.." +
                              std::to_string(structure.delta().size()));
      return structure.delta().segment(lo - 1, hi - lo + 1).mean();
    }
    case Structure::CalendarVarying: {
      if (lo < 2 || hi > structure.xi().size() + 1)
        throw IndexOutOfRange("CTATE interval outside j=2.." +
                              std::to_string(structure.xi().size() + 1));
      return structure.xi().segment(lo - 2, hi - lo + 1).mean();
    }
  }
  throw WrongStructure("unreachable");
}

ScenarioSpec preset_scenario(const std::string& name) {
  ScenarioSpec s;
  s.name = name;
  s.design = build_design(18, 10, 30);
  s.period_effects = Eigen::VectorXd::LinSpaced(10, 5.0, 14.0);
  s.correlation = {CorrelationKind::Exchangeable, 1.0 / 9.0, 0.0, 1.0};
  s.seed = 20240101;
  if (name == "sim1-immediate") {
    s.structure = TreatmentStructure::immediate(6.0);
  } else if (name == "sim2-exposure") {
    Eigen::VectorXd delta(9);
    delta << 0, 0, 0.5, 1, 2, 4, 6, 6, 6;
    s.structure = TreatmentStructure::exposure_varying(delta);
  } else if (name == "sim3-calendar") {
    Eigen::VectorXd xi(8);
    xi << 6, 3, 1, 0.5, 0.1, 0, 0, 0;
    s.structure = TreatmentStructure::calendar_varying(xi);
  } else {
    throw ValidationError("unknown scenario preset '" + name + "'");
  }
  return s;
}

std::vector<std::string> preset_names() {
  return {"sim1-immediate", "sim2-exposure", "sim3-calendar"};
}

}  // namespace swcrt
