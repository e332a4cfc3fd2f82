#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>

#include "swcrt/correlation.hpp"
#include "swcrt/design.hpp"
#include "swcrt/dgp.hpp"

namespace swcrt {

enum class ScaleSource { Known, CellResidual, PooledResidual };

struct FitResult {
  Structure structure = Structure::Immediate;
  Eigen::VectorXd beta;                  // treatment block then period block
  Eigen::MatrixXd unscaled_information;  // Z' V^-1 Z with unit-scale correlation
  double gamma_used = 0.0;
  double scale = 0.0;  // Var(Ybar_ij): known, or estimated from residuals
  ScaleSource scale_source = ScaleSource::CellResidual;
  int n_clusters = 0;
  int n_obs = 0;  // cluster-period cells entering the fit
  int n_treatment_cols = 0;
  int n_mean_params = 0;
  int n_var_params = 1;
  bool gamma_at_boundary = false;
  std::optional<double> log_likelihood;  // ML log-likelihood (see information_criteria)
  std::optional<double> reml_criterion;  // restricted log-likelihood at gamma_used
};

// GLS on cluster-period means at a fixed gamma. The scale is estimated from
// the weighted residual sum of squares (n - p denominator); the point
// estimate depends on gamma only.
FitResult fit_gls(const DesignMatrix& dm, const Eigen::MatrixXd& cell_means,
                  double gamma);

// Same point estimator, but the reported scale comes from known variance
// components instead of residuals.
FitResult fit_gls(const DesignMatrix& dm, const Eigen::MatrixXd& cell_means,
                  const CorrelationSpec& components, int cell_size);

// Fixed-gamma fit that also uses the individual-level data: the scale and the
// ML log-likelihood pool the within-cell error contrasts with the cell-level
// residuals, which is what an individual-level working model reports.
FitResult fit_gls(const DesignMatrix& dm, const TrialData& trial, double gamma);

// Feasible GLS: gamma estimated by 1-D REML on cluster-period means (profiled
// over the scale; Brent search on [0, 1-1e-6], |gamma| tolerance 1e-8, max 200
// iterations). Boundary maxima are legitimate results with gamma_at_boundary
// set. The stored log_likelihood is the ML log-likelihood maximized over its
// own gamma so that information criteria are comparable across nested mean
// structures.
FitResult fit_feasible_gls(const DesignMatrix& dm, const Eigen::MatrixXd& cell_means);

// Feasible GLS with the REML criterion of the individual-level random
// intercept model (within-cell contrasts pin sigma_e^2); still a 1-D search
// in gamma. This is the mixed-model fit of the simulation study.
FitResult fit_feasible_gls(const DesignMatrix& dm, const TrialData& trial);

double aggregate_etate(const FitResult& fit);
double aggregate_ctate(const FitResult& fit);
// theta-hat / ETATE / CTATE according to the fitted structure.
double scalar_estimate(const FitResult& fit);

// (AIC, BIC) from the stored maximized log-likelihood;
// p = mean parameters + variance parameters.
std::pair<double, double> information_criteria(const FitResult& fit, int n_obs);

}  // namespace swcrt
