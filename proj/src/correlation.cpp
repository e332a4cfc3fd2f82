#include "swcrt/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace swcrt {

void validate(const CorrelationSpec& spec) {
  if (!(spec.sigma_e_sq > 0.0) || !std::isfinite(spec.sigma_e_sq))
    throw InvalidVariance("sigma_e_sq must be positive and finite");
  if (spec.tau_alpha_sq < 0.0 || !std::isfinite(spec.tau_alpha_sq))
    throw InvalidVariance("tau_alpha_sq must be nonnegative and finite");
  if (spec.tau_omega_sq < 0.0 || !std::isfinite(spec.tau_omega_sq))
    throw InvalidVariance("tau_omega_sq must be nonnegative and finite");
}

double gamma_of(const CorrelationSpec& spec, int cell_size) {
  validate(spec);
  if (cell_size < 1) throw InvalidVariance("cell size must be positive");
  if (spec.kind == CorrelationKind::Independence) return 0.0;
  double denom = spec.tau_alpha_sq + spec.sigma_e_sq / cell_size;
  if (spec.kind == CorrelationKind::NestedExchangeable) denom += spec.tau_omega_sq;
  const double g = spec.tau_alpha_sq / denom;
  return std::clamp(g, 0.0, kGammaCap);
}

double cell_variance(const CorrelationSpec& spec, int cell_size) {
  validate(spec);
  if (spec.kind == CorrelationKind::Independence)
    return spec.sigma_e_sq / cell_size;
  double v = spec.tau_alpha_sq + spec.sigma_e_sq / cell_size;
  if (spec.kind == CorrelationKind::NestedExchangeable) v += spec.tau_omega_sq;
  return v;
}

double icc(const CorrelationSpec& spec) {
  validate(spec);
  if (spec.kind == CorrelationKind::Independence) return 0.0;
  return spec.tau_alpha_sq / (spec.tau_alpha_sq + spec.sigma_e_sq);
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0) || !(gamma < 1.0))
    throw InvalidGamma("gamma=" + std::to_string(gamma) + " outside [0,1)");
}

Eigen::MatrixXd cluster_correlation_matrix(double gamma, int n_periods) {
  check_gamma(gamma);
  if (n_periods < 1) throw DegenerateDesign("n_periods must be positive");
  Eigen::MatrixXd r = Eigen::MatrixXd::Constant(n_periods, n_periods, gamma);
  r.diagonal().setOnes();
  return r;
}

Eigen::MatrixXd cluster_precision_matrix(double gamma, int n_periods) {
  check_gamma(gamma);
  if (n_periods < 1) throw DegenerateDesign("n_periods must be positive");
  const double off = -gamma / ((1.0 + (n_periods - 1) * gamma) * (1.0 - gamma));
  Eigen::MatrixXd w = Eigen::MatrixXd::Constant(n_periods, n_periods, off);
  w.diagonal().array() = 1.0 / (1.0 - gamma) + off;
  return w;
}

}  // namespace swcrt
