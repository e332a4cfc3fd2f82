#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>

#include "swcrt/gls.hpp"

namespace swcrt {

enum class VarianceMethod { ModelBased, CR0, CR2, CR3 };
enum class DofRule { Normal, TClustersMinusOne };

std::string variance_method_name(VarianceMethod m);
VarianceMethod variance_method_from_name(const std::string& name);

// scale * (Z'V^-1 Z)^-1 -- the working-model covariance of beta-hat.
Eigen::MatrixXd model_vcov(const FitResult& fit);

// Cluster-robust sandwich B^-1 (sum_i Z_i'W A_i e_i e_i' A_i' W Z_i) B^-1 on
// cluster-period means, with W the scale-free precision block and
// A_i = I (CR0), (I - H_ii)^-1/2 (CR2), (I - H_ii)^-1 (CR3), where
// H_ii = Z_i B^-1 Z_i' W is the cluster leverage block. The CR2 root is taken
// in the W-metric (symmetric for independence fits), eigenvalue floor 1e-10.
Eigen::MatrixXd cluster_robust_vcov(const FitResult& fit, const DesignMatrix& dm,
                                    const Eigen::MatrixXd& cell_means,
                                    VarianceMethod method);

// c' Sigma c.
double contrast_variance(const Eigen::MatrixXd& vcov, const Eigen::VectorXd& contrast);

// point +/- q(0.975) * se; Normal quantile, or Student-t with n_clusters-1
// degrees of freedom (the robust-variance default).
std::pair<double, double> confidence_interval(double point, double se,
                                              DofRule rule, int n_clusters = 0);

DofRule default_dof_rule(VarianceMethod m);

struct VarianceReport {
  std::string estimator;  // IT | ETATE | CTATE
  double point = 0.0;
  double se = 0.0;
  VarianceMethod method = VarianceMethod::ModelBased;
  double ci_low = 0.0;
  double ci_high = 0.0;
  DofRule dof_rule = DofRule::Normal;
};

// Scalar-estimator report (point, se, CI) for one fitted model and method.
VarianceReport estimator_report(const FitResult& fit, const DesignMatrix& dm,
                                const Eigen::MatrixXd& cell_means,
                                VarianceMethod method);

}  // namespace swcrt
