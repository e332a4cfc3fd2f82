#include "swcrt/variance.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "swcrt/correlation.hpp"

namespace swcrt {

std::string variance_method_name(VarianceMethod m) {
  switch (m) {
    case VarianceMethod::ModelBased: return "model";
    case VarianceMethod::CR0: return "CR0";
    case VarianceMethod::CR2: return "CR2";
    case VarianceMethod::CR3: return "CR3";
  }
  return "?";
}

VarianceMethod variance_method_from_name(const std::string& name) {
  if (name == "model" || name == "model-based") return VarianceMethod::ModelBased;
  if (name == "CR0" || name == "cr0") return VarianceMethod::CR0;
  if (name == "CR2" || name == "cr2") return VarianceMethod::CR2;
  if (name == "CR3" || name == "cr3") return VarianceMethod::CR3;
  throw ValidationError("unknown variance method '" + name + "'");
}

Eigen::MatrixXd model_vcov(const FitResult& fit) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(fit.unscaled_information);
  if (ldlt.info() != Eigen::Success)
    throw SingularDesign("information matrix could not be inverted");
  const Eigen::MatrixXd inv = ldlt.solve(
      Eigen::MatrixXd::Identity(fit.unscaled_information.rows(),
                                fit.unscaled_information.cols()));
  return fit.scale * inv;
}

namespace {

constexpr double kEigFloor = 1e-10;

// (I - H)^-1 or its inverse square root via the symmetric W-metric form
// S = I - W^1/2 Z B^-1 Z' W^1/2; A = W^-1/2 f(S) W^1/2 is then a genuine
// matrix function of (I - H).
Eigen::MatrixXd leverage_adjustment(const Eigen::MatrixXd& zi,
                                    const Eigen::MatrixXd& w,
                                    const Eigen::LDLT<Eigen::MatrixXd>& binv,
                                    bool inverse_sqrt) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ws(w);
  const Eigen::MatrixXd wh = ws.operatorSqrt();
  const Eigen::MatrixXd whi = ws.operatorInverseSqrt();
  const Eigen::MatrixXd s =
      Eigen::MatrixXd::Identity(zi.rows(), zi.rows()) -
      wh * zi * binv.solve(zi.transpose()) * wh;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev[k] < kEigFloor)
      throw LeverageSingular("cluster leverage block is singular (eigenvalue " +
                             std::to_string(ev[k]) + ")");
    ev[k] = inverse_sqrt ? 1.0 / std::sqrt(ev[k]) : 1.0 / ev[k];
  }
  const Eigen::MatrixXd f =
      es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return whi * f * wh;
}

}  // namespace

Eigen::MatrixXd cluster_robust_vcov(const FitResult& fit, const DesignMatrix& dm,
                                    const Eigen::MatrixXd& cell_means,
                                    VarianceMethod method) {
  if (method == VarianceMethod::ModelBased) return model_vcov(fit);
  if (fit.n_clusters < 2) throw TooFewClusters("robust variance needs >= 2 clusters");

  const int I = cell_means.rows();
  const int J = cell_means.cols();
  const int p = dm.n_cols();
  if (static_cast<int>(dm.rows.size()) != I * J || fit.beta.size() != p)
    throw DimensionMismatch("fit, design matrix and means do not align");

  Eigen::LDLT<Eigen::MatrixXd> binv(fit.unscaled_information);
  if (binv.info() != Eigen::Success)
    throw SingularDesign("bread matrix could not be factorized");

  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
  for (int c = 0; c < I; ++c) {
    int m = 0;
    for (int j = 0; j < J; ++j)
      if (dm.included[c * J + j]) ++m;
    Eigen::MatrixXd zi(m, p);
    Eigen::VectorXd ei(m);
    int r = 0;
    for (int j = 0; j < J; ++j) {
      const int row = c * J + j;
      if (!dm.included[row]) continue;
      zi.row(r) = dm.X.row(row);
      ei[r] = cell_means(c, j) - dm.X.row(row).dot(fit.beta);
      ++r;
    }
    const Eigen::MatrixXd w = cluster_precision_matrix(fit.gamma_used, m);
    Eigen::VectorXd adj = ei;
    if (method == VarianceMethod::CR2)
      adj = leverage_adjustment(zi, w, binv, true) * ei;
    else if (method == VarianceMethod::CR3)
      adj = leverage_adjustment(zi, w, binv, false) * ei;
    const Eigen::VectorXd gvec = zi.transpose() * (w * adj);
    meat.noalias() += gvec * gvec.transpose();
  }
  return binv.solve(binv.solve(meat).transpose());
}

double contrast_variance(const Eigen::MatrixXd& vcov, const Eigen::VectorXd& contrast) {
  if (vcov.rows() != contrast.size())
    throw DimensionMismatch("contrast length " + std::to_string(contrast.size()) +
                            " vs vcov dimension " + std::to_string(vcov.rows()));
  return contrast.dot(vcov * contrast);
}

std::pair<double, double> confidence_interval(double point, double se,
                                              DofRule rule, int n_clusters) {
  if (se < 0.0) throw InvalidVariance("negative standard error");
  double q;
  if (rule == DofRule::Normal) {
    q = boost::math::quantile(boost::math::normal_distribution<>(), 0.975);
  } else {
    if (n_clusters < 2) throw TooFewClusters("t interval needs >= 2 clusters");
    q = boost::math::quantile(
        boost::math::students_t_distribution<>(n_clusters - 1.0), 0.975);
  }
  return {point - q * se, point + q * se};
}

DofRule default_dof_rule(VarianceMethod m) {
  return m == VarianceMethod::ModelBased ? DofRule::Normal
                                         : DofRule::TClustersMinusOne;
}

VarianceReport estimator_report(const FitResult& fit, const DesignMatrix& dm,
                                const Eigen::MatrixXd& cell_means,
                                VarianceMethod method) {
  VarianceReport rep;
  rep.estimator = estimator_name(fit.structure);
  rep.point = scalar_estimate(fit);
  rep.method = method;
  rep.dof_rule = default_dof_rule(method);
  const Eigen::MatrixXd vc = method == VarianceMethod::ModelBased
                                 ? model_vcov(fit)
                                 : cluster_robust_vcov(fit, dm, cell_means, method);
  rep.se = std::sqrt(std::max(0.0, contrast_variance(vc, dm.averaging_contrast())));
  std::tie(rep.ci_low, rep.ci_high) =
      confidence_interval(rep.point, rep.se, rep.dof_rule, fit.n_clusters);
  return rep;
}

}  // namespace swcrt
