#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "swcrt/design.hpp"

namespace swcrt {

enum class WeightMethod { Analytic, Numeric };

// Estimand weights of a (possibly misspecified) scalar estimator: the
// coefficient each true per-time effect receives in the estimator's
// conditional expectation. Indices follow the paper: exposure truths are
// labeled s = 1..J-1 (or 1..J-2 for the period-J-excluded CTATE analysis),
// calendar truths j = 2..J-1, and an immediate truth has the single label 1.
struct WeightProfile {
  Structure analysis = Structure::Immediate;
  Structure truth = Structure::Immediate;
  double gamma = 0.0;
  std::vector<int> indices;
  Eigen::VectorXd weights;
  WeightMethod method = WeightMethod::Numeric;

  double sum() const { return weights.sum(); }
};

// IT estimator under an exposure-varying truth (closed form, s = 1..Q):
// w1(Q,g,s) = 6(s-Q-1)((1+2gQ)s-(1+g+gQ)Q) / [Q(Q+1)(gQ^2+2Q-gQ-2)].
WeightProfile w1_exposure_weights(int Q, double gamma);

// IT estimator under a calendar-varying truth (Theorem-1 closed form,
// gamma-independent and nonnegative): w2(Q,j) = 6(j-1)(Q+1-j)/[Q(Q+1)(Q-1)].
WeightProfile w2_calendar_weights(int Q);

enum class FinalPeriodRows { Exclude, Retain };

// Per-cell weights of the scalar summary (theta-hat, ETATE or CTATE): the
// matching rows of (Z'V^-1 Z)^-1 Z'V^-1, averaged over the treatment block.
// Entries align with rows_out (cluster-major, excluded rows carry weight 0).
Eigen::VectorXd lambda_cell_weights(const DesignSpec& design, Structure analysis,
                                    double gamma,
                                    FinalPeriodRows cti_rows = FinalPeriodRows::Exclude,
                                    std::vector<DesignRow>* rows_out = nullptr);

// General numeric engine: builds the treatment-coefficient rows of
// (Z'V^-1 Z)^-1 Z'V^-1 for the analysis model, collapses cluster weights to
// sequence weights, and accumulates them against the truth structure's cells.
// Any analysis/truth pair is allowed; analysis = CTI drops the period-J rows
// by default (the fit convention retains them; pass Retain to mirror it).
WeightProfile lambda_weights(const DesignSpec& design, Structure analysis,
                             Structure truth, double gamma,
                             FinalPeriodRows cti_rows = FinalPeriodRows::Exclude);

// ETATE estimator under a calendar-varying truth (numeric; matches the
// printed 3-sequence closed form at Q=3).
WeightProfile w3_etate_weights(const DesignSpec& design, double gamma);

// CTATE estimator (period J excluded) under an exposure-varying truth
// (numeric; indices s = 1..J-2, matching the printed Q=3 closed form).
WeightProfile w4_ctate_weights(const DesignSpec& design, double gamma);

// Sum_k weight_k * effect_k for the matching truth vector.
double expected_misspecified_estimate(const WeightProfile& profile,
                                      const TreatmentStructure& truth);

enum class WeightFamily { W1, W2, W3, W4 };

std::string family_name(WeightFamily f);
WeightFamily family_from_name(const std::string& name);

struct WeightCurveRow {
  WeightFamily family;
  int Q;
  double gamma;
  int index;
  double weight;
  double scaled_weight;  // (J-1)*w1, (J-2)*w2, (J-2)*w3, (J-2)*w4
};

std::vector<WeightCurveRow> weight_curve_table(WeightFamily family,
                                               const std::vector<int>& q_list,
                                               const std::vector<double>& gamma_list);

}  // namespace swcrt
