#pragma once

#include <Eigen/Dense>

#include "swcrt/errors.hpp"

namespace swcrt {

enum class CorrelationKind { Exchangeable, NestedExchangeable, Independence };

// Variance components of the random-effects structure on cluster-period means.
// Only gamma (the within-cluster correlation of the means) reaches point
// estimation; the cell-level scale Var(Ybar_ij) re-enters in model-based
// variances.
struct CorrelationSpec {
  CorrelationKind kind = CorrelationKind::Exchangeable;
  double tau_alpha_sq = 0.0;  // cluster random-intercept variance
  double tau_omega_sq = 0.0;  // cluster-period variance (nested-exchangeable)
  double sigma_e_sq = 1.0;    // residual variance
};

// Upper clamp keeps the exchangeable block nonsingular for boundary inputs.
inline constexpr double kGammaCap = 1.0 - 1e-9;

void validate(const CorrelationSpec& spec);

// gamma = tau_a^2 / (tau_a^2 + sigma_e^2/K)            (exchangeable)
//       = tau_a^2 / (tau_a^2 + tau_w^2 + sigma_e^2/K)  (nested exchangeable)
//       = 0                                            (independence)
double gamma_of(const CorrelationSpec& spec, int cell_size);

// Var(Ybar_ij) implied by the components at cell size K.
double cell_variance(const CorrelationSpec& spec, int cell_size);

// ICC rho = tau_a^2 / (tau_a^2 + sigma_e^2); diagnostic only, never an input.
double icc(const CorrelationSpec& spec);

// (1-gamma) I + gamma J  (J x J, symmetric positive definite for gamma in [0,1)).
Eigen::MatrixXd cluster_correlation_matrix(double gamma, int n_periods);

// Closed-form inverse of the exchangeable block:
// (1/(1-gamma)) (I - gamma/(1+(J-1)gamma) J).
Eigen::MatrixXd cluster_precision_matrix(double gamma, int n_periods);

void check_gamma(double gamma);

}  // namespace swcrt
