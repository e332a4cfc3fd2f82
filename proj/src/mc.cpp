#include "swcrt/mc.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "swcrt/csv.hpp"

namespace swcrt {

std::string gamma_policy_name(GammaPolicy p) {
  switch (p) {
    case GammaPolicy::RemlPooled: return "reml";
    case GammaPolicy::RemlMeans: return "reml-means";
    case GammaPolicy::Fixed: return "fixed";
  }
  return "?";
}

GammaPolicy gamma_policy_from_name(const std::string& name) {
  if (name == "reml" || name == "reml-pooled") return GammaPolicy::RemlPooled;
  if (name == "reml-means") return GammaPolicy::RemlMeans;
  if (name == "fixed") return GammaPolicy::Fixed;
  throw ValidationError("unknown gamma policy '" + name + "'");
}

std::string AnalysisSpec::label() const {
  return estimator_name(structure) + "/" +
         (correlation == CorrelationKind::Independence ? "independence"
                                                       : "exchangeable");
}

namespace {

struct RepOutcome {
  bool ok = false;
  double estimate = 0.0;
  std::vector<double> variance;  // per variance method
  std::vector<char> covered;
};

FitResult run_fit(const AnalysisSpec& a, const DesignMatrix& dm,
                  const TrialData& trial) {
  if (a.correlation == CorrelationKind::Independence)
    return fit_gls(dm, trial, 0.0);
  switch (a.gamma_policy) {
    case GammaPolicy::RemlPooled: return fit_feasible_gls(dm, trial);
    case GammaPolicy::RemlMeans: return fit_feasible_gls(dm, trial.cell_means);
    case GammaPolicy::Fixed: return fit_gls(dm, trial.cell_means, a.fixed_gamma);
  }
  throw ValidationError("unreachable gamma policy");
}

}  // namespace

std::vector<SimReport> run_study(const ScenarioSpec& scenario,
                                 const std::vector<AnalysisSpec>& analyses,
                                 int n_reps, std::uint64_t base_seed,
                                 int n_threads) {
  validate(scenario);
  if (n_reps < 1) throw ValidationError("n_reps must be >= 1");
  if (analyses.empty()) throw ValidationError("no analyses requested");

  std::vector<DesignMatrix> dms;
  dms.reserve(analyses.size());
  for (const auto& a : analyses)
    dms.push_back(design_matrix(scenario.design, a.structure,
                                a.cti_rows == FinalPeriodRows::Exclude &&
                                    a.structure == Structure::CalendarVarying));

  const double truth = true_estimand(scenario.structure);
  ScenarioSpec sc = scenario;
  sc.seed = base_seed;

  // one outcome slot per (replicate, analysis): filled independently, folded
  // in replicate order afterwards so the result is schedule-invariant
  std::vector<std::vector<RepOutcome>> grid(
      n_reps, std::vector<RepOutcome>(analyses.size()));

  auto worker = [&](int lo, int hi) {
    for (int r = lo; r < hi; ++r) {
      const TrialData trial = simulate_trial(sc, static_cast<std::uint64_t>(r));
      for (size_t a = 0; a < analyses.size(); ++a) {
        RepOutcome& out = grid[r][a];
        try {
          const FitResult fit = run_fit(analyses[a], dms[a], trial);
          out.estimate = scalar_estimate(fit);
          const Eigen::VectorXd contrast = dms[a].averaging_contrast();
          for (VarianceMethod m : analyses[a].variance_methods) {
            const Eigen::MatrixXd vc =
                m == VarianceMethod::ModelBased
                    ? model_vcov(fit)
                    : cluster_robust_vcov(fit, dms[a], trial.cell_means, m);
            const double v = contrast_variance(vc, contrast);
            const auto [lo_ci, hi_ci] = confidence_interval(
                out.estimate, std::sqrt(std::max(0.0, v)),
                default_dof_rule(m), fit.n_clusters);
            out.variance.push_back(v);
            out.covered.push_back(lo_ci <= truth && truth <= hi_ci ? 1 : 0);
          }
          out.ok = true;
        } catch (const ComputeFault&) {
          out = RepOutcome{};  // counted, never silently dropped
        }
      }
    }
  };

  const int threads = std::max(1, std::min(n_threads, n_reps));
  if (threads == 1) {
    worker(0, n_reps);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n_reps + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int lo = t * chunk;
      const int hi = std::min(n_reps, lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  std::vector<SimReport> reports;
  for (size_t a = 0; a < analyses.size(); ++a) {
    const auto& spec = analyses[a];
    int n_ok = 0, n_failed = 0;
    double sum = 0.0, sumsq = 0.0;
    std::vector<double> var_sum(spec.variance_methods.size(), 0.0);
    std::vector<int> cov_sum(spec.variance_methods.size(), 0);
    for (int r = 0; r < n_reps; ++r) {
      const RepOutcome& out = grid[r][a];
      if (!out.ok) {
        ++n_failed;
        continue;
      }
      ++n_ok;
      sum += out.estimate;
      sumsq += out.estimate * out.estimate;
      for (size_t m = 0; m < spec.variance_methods.size(); ++m) {
        var_sum[m] += out.variance[m];
        cov_sum[m] += out.covered[m];
      }
    }
    const double mean = n_ok > 0 ? sum / n_ok : 0.0;
    const double sd =
        n_ok > 1 ? std::sqrt(std::max(0.0, (sumsq - n_ok * mean * mean) / (n_ok - 1)))
                 : 0.0;
    for (size_t m = 0; m < spec.variance_methods.size(); ++m) {
      SimReport rep;
      rep.scenario = scenario.name;
      rep.estimator = estimator_name(spec.structure);
      rep.correlation = spec.correlation == CorrelationKind::Independence
                            ? "independence"
                            : "exchangeable";
      rep.variance_method = variance_method_name(spec.variance_methods[m]);
      rep.n_reps = n_reps;
      rep.mean_estimate = mean;
      rep.true_estimand = truth;
      if (std::abs(truth) >= 1e-8)
        rep.percent_bias = 100.0 * (mean - truth) / truth;
      rep.precision = n_ok > 0 && var_sum[m] > 0.0 ? n_ok / var_sum[m] : 0.0;
      rep.coverage = n_ok > 0 ? static_cast<double>(cov_sum[m]) / n_ok : 0.0;
      rep.mc_se = sd;
      rep.n_failed = n_failed;
      reports.push_back(rep);
    }
  }
  return reports;
}

BiasCheck analytic_bias_check(const ScenarioSpec& scenario, Structure analysis,
                              double gamma, int n_reps, std::uint64_t base_seed,
                              int n_threads) {
  AnalysisSpec a;
  a.structure = analysis;
  a.correlation = CorrelationKind::Exchangeable;
  a.gamma_policy = GammaPolicy::Fixed;
  a.fixed_gamma = gamma;
  a.cti_rows = FinalPeriodRows::Exclude;  // match the w4 weight convention
  a.variance_methods = {VarianceMethod::ModelBased};
  const auto reports = run_study(scenario, {a}, n_reps, base_seed, n_threads);

  const WeightProfile prof = lambda_weights(
      scenario.design, analysis, scenario.structure.kind(), gamma,
      FinalPeriodRows::Exclude);
  BiasCheck check;
  check.expected = expected_misspecified_estimate(prof, scenario.structure);
  check.mc_mean = reports.front().mean_estimate;
  check.mc_se = reports.front().mc_se;
  check.n_reps = n_reps;
  const double se_mean = check.mc_se / std::sqrt(static_cast<double>(n_reps));
  check.z = se_mean > 0.0 ? (check.mc_mean - check.expected) / se_mean : 0.0;
  return check;
}

void write_sim_reports_csv(const std::vector<SimReport>& reports,
                           const std::string& path) {
  CsvWriter csv(path);
  csv.header({"scenario", "estimator", "correlation", "variance_method",
              "n_reps", "mean", "truth", "pct_bias", "precision", "coverage",
              "mc_se", "n_failed"});
  for (const auto& r : reports) {
    csv.field(r.scenario);
    csv.field(r.estimator);
    csv.field(r.correlation);
    csv.field(r.variance_method);
    csv.field(r.n_reps);
    csv.field(r.mean_estimate);
    if (r.true_estimand) csv.field(*r.true_estimand); else csv.field("undefined");
    if (r.percent_bias) csv.field(*r.percent_bias); else csv.field("NA");
    csv.field(r.precision);
    csv.field(r.coverage);
    csv.field(r.mc_se);
    csv.field(r.n_failed);
    csv.end_row();
  }
}

}  // namespace swcrt
