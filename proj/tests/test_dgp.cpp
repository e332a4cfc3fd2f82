#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "swcrt/dgp.hpp"

using namespace swcrt;

namespace {

ScenarioSpec noiseless_it(double theta) {
  ScenarioSpec s;
  s.design = build_design(9, 10, 2);
  s.structure = TreatmentStructure::immediate(theta);
  s.period_effects = Eigen::VectorXd::LinSpaced(10, 5.0, 14.0);
  s.correlation = {CorrelationKind::Exchangeable, 0.0, 0.0, 1e-20};
  s.seed = 7;
  return s;
}

}  // namespace

TEST_CASE("noiseless recovery: means equal phi_j + theta I(j>q)") {
  const ScenarioSpec s = noiseless_it(6.0);
  const TrialData t = simulate_trial(s);
  for (int c = 1; c <= s.design.n_clusters; ++c) {
    const int q = sequence_of_cluster(s.design, c);
    for (int j = 1; j <= s.design.n_periods; ++j) {
      const double want = s.period_effects[j - 1] + (j > q ? 6.0 : 0.0);
      CHECK(t.cell_means(c - 1, j - 1) == doctest::Approx(want).epsilon(1e-8));
    }
  }
}

TEST_CASE("seeded reproducibility is bit-exact") {
  ScenarioSpec s = preset_scenario("sim2-exposure");
  const TrialData a = simulate_trial(s, 3);
  const TrialData b = simulate_trial(s, 3);
  CHECK(a.individuals == b.individuals);
  const TrialData c = simulate_trial(s, 4);
  CHECK(a.individuals != c.individuals);
}

TEST_CASE("cell means are exact averages of their individuals") {
  const ScenarioSpec s = preset_scenario("sim1-immediate");
  const TrialData t = simulate_trial(s, 1);
  for (int c = 0; c < s.design.n_clusters; ++c)
    for (int j = 0; j < s.design.n_periods; ++j)
      CHECK(t.cell_means(c, j) ==
            t.individuals.row(c * s.design.n_periods + j).mean());
}

TEST_CASE("preset scenarios carry the section-5 vectors") {
  const ScenarioSpec s2 = preset_scenario("sim2-exposure");
  Eigen::VectorXd want(9);
  want << 0, 0, 0.5, 1, 2, 4, 6, 6, 6;
  CHECK(s2.structure.delta() == want);
  CHECK(true_estimand(s2.structure) == doctest::Approx(2.0 + 5.0 / 6.0).epsilon(1e-12));

  const ScenarioSpec s3 = preset_scenario("sim3-calendar");
  CHECK(true_estimand(s3.structure) == doctest::Approx(1.325).epsilon(1e-12));
  CHECK(s3.structure.xi().size() == 8);

  const ScenarioSpec s1 = preset_scenario("sim1-immediate");
  CHECK(true_estimand(s1.structure) == 6.0);

  CHECK_THROWS_AS(preset_scenario("sim4-nothing"), ValidationError);
}

TEST_CASE("scenario-2 marginal mean at cell (q=1, j=10)") {
  // sample-mean oracle: 1000 replicates, must land within 3 MC SEs of 14 + 6
  ScenarioSpec s = preset_scenario("sim2-exposure");
  const int reps = 1000;
  double sum = 0.0, sumsq = 0.0;
  for (int r = 0; r < reps; ++r) {
    const TrialData t = simulate_trial(s, static_cast<std::uint64_t>(r));
    const double v = t.cell_means(0, 9);  // cluster 1 (sequence 1), period 10
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / reps;
  const double sd = std::sqrt((sumsq - reps * mean * mean) / (reps - 1));
  const double mcse = sd / std::sqrt(static_cast<double>(reps));
  CHECK(std::abs(mean - 20.0) < 3.0 * mcse + 1e-9);
}

TEST_CASE("scenario-3 final period carries no treatment effect (xi_J = 0)") {
  ScenarioSpec s = preset_scenario("sim3-calendar");
  CHECK(cell_expectation(s, 1, 10) == doctest::Approx(14.0));
  CHECK(cell_expectation(s, 1, 2) == doctest::Approx(6.0 + 6.0));
}

TEST_CASE("marginal means match effect + phi in all three presets") {
  for (const auto& name : preset_names()) {
    ScenarioSpec s = preset_scenario(name);
    s.design = build_design(9, 10, 4);  // lighter grid for the oracle sweep
    const int reps = 2000;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(9, 10);
    Eigen::MatrixXd sumsq = Eigen::MatrixXd::Zero(9, 10);
    for (int r = 0; r < reps; ++r) {
      const TrialData t = simulate_trial(s, static_cast<std::uint64_t>(r));
      sum += t.cell_means;
      sumsq += t.cell_means.cwiseProduct(t.cell_means);
    }
    for (int c = 1; c <= 9; ++c) {
      for (int j = 1; j <= 10; ++j) {
        const double mean = sum(c - 1, j - 1) / reps;
        const double sd = std::sqrt(
            (sumsq(c - 1, j - 1) - reps * mean * mean) / (reps - 1));
        const double want = cell_expectation(s, sequence_of_cluster(s.design, c), j);
        CHECK(std::abs(mean - want) < 4.0 * sd / std::sqrt(static_cast<double>(reps)));
      }
    }
  }
}

TEST_CASE("constant-effect exposure structure collapses to immediate") {
  ScenarioSpec a = preset_scenario("sim1-immediate");
  a.structure = TreatmentStructure::immediate(2.5);
  ScenarioSpec b = a;
  b.structure = TreatmentStructure::exposure_varying(Eigen::VectorXd::Constant(9, 2.5));
  const TrialData ta = simulate_trial(a, 11);
  const TrialData tb = simulate_trial(b, 11);
  CHECK(ta.individuals == tb.individuals);  // identical draws, identical effects
}

TEST_CASE("true_estimand intervals and mismatches") {
  Eigen::VectorXd delta(9);
  delta << 0, 0, 0.5, 1, 2, 4, 6, 6, 6;
  const auto eti = TreatmentStructure::exposure_varying(delta);
  CHECK(true_estimand(eti, 1, 9) == doctest::Approx(2.8333333333).epsilon(1e-9));
  CHECK(true_estimand(eti, 6, 8) == doctest::Approx(16.0 / 3.0));
  CHECK_THROWS_AS(true_estimand(eti, 0, 3), IndexOutOfRange);

  Eigen::VectorXd xi(2);
  xi << 4, 2;
  const auto cti = TreatmentStructure::calendar_varying(xi);
  CHECK(true_estimand(cti) == 3.0);
  CHECK_THROWS_AS(true_estimand(cti, 1, 2), IndexOutOfRange);
}

TEST_CASE("dimension validation") {
  ScenarioSpec s = preset_scenario("sim1-immediate");
  s.period_effects = Eigen::VectorXd::Zero(9);
  CHECK_THROWS_AS(simulate_trial(s), DimensionMismatch);

  ScenarioSpec s2 = preset_scenario("sim2-exposure");
  s2.design = build_design(8, 9, 2);  // J=9 but delta has 9 entries (needs 8)
  CHECK_THROWS_AS(simulate_trial(s2), DimensionMismatch);
}

TEST_CASE("within-cell sum of squares scales with sigma_e") {
  ScenarioSpec s = preset_scenario("sim1-immediate");
  const TrialData t = simulate_trial(s, 5);
  const double ssw = t.within_cell_ss();
  const int dof = 18 * 10 * 29;
  CHECK(ssw / dof == doctest::Approx(1.0).epsilon(0.05));  // sigma_e^2 = 1
}
