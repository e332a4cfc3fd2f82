#include "swcrt/gls.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace swcrt {

namespace {

constexpr double kGammaHi = 1.0 - 1e-6;
constexpr double kGammaTol = 1e-8;
constexpr int kMaxIter = 200;

struct ClusterBlock {
  Eigen::MatrixXd Z;
  Eigen::VectorXd y;
};

// Pre-split design/outcome per cluster (included rows only) so the REML
// search can re-solve cheaply across gamma values.
class Engine {
 public:
  Engine(const DesignMatrix& dm, const Eigen::MatrixXd& cell_means) {
    const int I = cell_means.rows();
    const int J = cell_means.cols();
    if (static_cast<int>(dm.rows.size()) != I * J)
      throw DimensionMismatch("cell_means is " + std::to_string(I) + "x" +
                              std::to_string(J) + " but the design matrix has " +
                              std::to_string(dm.rows.size()) + " rows");
    p_ = dm.n_cols();
    blocks_.reserve(I);
    for (int c = 0; c < I; ++c) {
      int m = 0;
      for (int j = 0; j < J; ++j)
        if (dm.included[c * J + j]) ++m;
      ClusterBlock b;
      b.Z.resize(m, p_);
      b.y.resize(m);
      int r = 0;
      for (int j = 0; j < J; ++j) {
        const int row = c * J + j;
        if (!dm.included[row]) continue;
        b.Z.row(r) = dm.X.row(row);
        b.y[r] = cell_means(c, j);
        ++r;
      }
      n_ += m;
      blocks_.push_back(std::move(b));
    }
    Eigen::MatrixXd stacked(n_, p_);
    int r = 0;
    for (const auto& b : blocks_) {
      stacked.middleRows(r, b.Z.rows()) = b.Z;
      r += b.Z.rows();
    }
    if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(stacked).rank() < p_)
      throw SingularDesign("design matrix is rank deficient on included rows");
  }

  struct Solve {
    Eigen::VectorXd beta;
    Eigen::MatrixXd info;  // Z'WZ
    double rss;            // r'Wr
    double logdet_corr;
    double logdet_info;
  };

  Solve solve(double gamma) const {
    check_gamma(gamma);
    Solve s;
    s.info = Eigen::MatrixXd::Zero(p_, p_);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p_);
    s.logdet_corr = 0.0;
    for (const auto& b : blocks_) {
      const int m = b.Z.rows();
      const Eigen::MatrixXd w = cluster_precision_matrix(gamma, m);
      s.info.noalias() += b.Z.transpose() * w * b.Z;
      rhs.noalias() += b.Z.transpose() * w * b.y;
      s.logdet_corr += (m - 1) * std::log1p(-gamma) + std::log1p((m - 1) * gamma);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(s.info);
    if (ldlt.info() != Eigen::Success)
      throw SingularDesign("normal equations could not be factorized");
    s.beta = ldlt.solve(rhs);
    s.rss = 0.0;
    for (const auto& b : blocks_) {
      const Eigen::VectorXd r = b.y - b.Z * s.beta;
      s.rss += r.dot(cluster_precision_matrix(gamma, b.Z.rows()) * r);
    }
    s.logdet_info = 0.0;
    for (int i = 0; i < p_; ++i)
      s.logdet_info += std::log(ldlt.vectorD()[i]);
    return s;
  }

  int n() const { return n_; }
  int p() const { return p_; }
  int n_clusters() const { return static_cast<int>(blocks_.size()); }

 private:
  std::vector<ClusterBlock> blocks_;
  int n_ = 0;
  int p_ = 0;
};

struct BrentResult {
  double x = 0.0;
  double fx = 0.0;
  bool at_lower = false;
  bool at_upper = false;
};

// Bounded maximizer: golden-section with parabolic acceleration (Brent).
template <class F>
BrentResult brent_maximize(F f, double lo, double hi, double tol, int max_iter) {
  const double gold = 0.5 * (3.0 - std::sqrt(5.0));
  double a = lo, b = hi;
  double x = a + gold * (b - a);
  double w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double mid = 0.5 * (a + b);
    const double tol1 = tol * std::abs(x) + 1e-12;
    if (std::abs(x - mid) <= 2 * tol1 - 0.5 * (b - a)) break;
    bool parabolic = false;
    if (std::abs(e) > tol1) {
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double pnum = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) pnum = -pnum;
      q = std::abs(q);
      const double e_old = e;
      e = d;
      if (std::abs(pnum) < std::abs(0.5 * q * e_old) && pnum > q * (a - x) &&
          pnum < q * (b - x)) {
        d = pnum / q;
        const double u = x + d;
        if (u - a < 2 * tol1 || b - u < 2 * tol1)
          d = (mid > x) ? tol1 : -tol1;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x >= mid) ? a - x : b - x;
      d = gold * e;
    }
    const double u = (std::abs(d) >= tol1) ? x + d : x + ((d > 0) ? tol1 : -tol1);
    const double fu = f(u);
    if (fu >= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu >= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu >= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  BrentResult res;
  res.x = x;
  res.fx = fx;
  // the maximum may sit on the boundary, outside any interior bracket
  const double flo = f(lo), fhi = f(hi);
  if (flo >= res.fx) { res.x = lo; res.fx = flo; }
  if (fhi > res.fx) { res.x = hi; res.fx = fhi; }
  res.at_lower = res.x <= lo + tol;
  res.at_upper = res.x >= hi - tol;
  return res;
}

constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)

// Profile (over the scale) log-likelihoods for the means-level model.
double reml_means(const Engine::Solve& s, int n, int p) {
  if (!(s.rss > 0.0)) return -std::numeric_limits<double>::infinity();
  const int df = n - p;
  return -0.5 * (df * (kLog2Pi + 1.0 + std::log(s.rss / df)) + s.logdet_corr +
                 s.logdet_info);
}

double ml_means(const Engine::Solve& s, int n) {
  if (!(s.rss > 0.0)) return -std::numeric_limits<double>::infinity();
  return -0.5 * (n * (kLog2Pi + 1.0 + std::log(s.rss / n)) + s.logdet_corr);
}

// Pooled variants: the individual-level random-intercept likelihood split
// into within-cell error contrasts and the means-level part. n cells of size
// K, N = n*K individuals, ssw = within-cell sum of squares. The within-cell
// residual variance is K*s*(1-gamma) when the cell-level scale is s.
double pooled_scale(const Engine::Solve& s, double gamma, double ssw, int K,
                    int n, int p, bool reml) {
  const double denom = reml ? (static_cast<double>(n) * K - p)
                            : (static_cast<double>(n) * K);
  return (ssw / (K * (1.0 - gamma)) + s.rss) / denom;
}

double reml_pooled(const Engine::Solve& s, double gamma, double ssw, int K,
                   int n, int p) {
  const double N = static_cast<double>(n) * K;
  const double sc = pooled_scale(s, gamma, ssw, K, n, p, true);
  if (!(sc > 0.0)) return -std::numeric_limits<double>::infinity();
  const double n_w = N - n;
  return -0.5 * ((N - p) * kLog2Pi + n_w * (std::log(static_cast<double>(K)) + std::log1p(-gamma)) +
                 (N - p) * std::log(sc) + n * std::log(static_cast<double>(K)) +
                 s.logdet_corr + s.logdet_info + (N - p));
}

double ml_pooled(const Engine::Solve& s, double gamma, double ssw, int K,
                 int n, int p) {
  const double N = static_cast<double>(n) * K;
  const double sc = pooled_scale(s, gamma, ssw, K, n, p, false);
  if (!(sc > 0.0)) return -std::numeric_limits<double>::infinity();
  const double n_w = N - n;
  return -0.5 * (N * kLog2Pi + n_w * (std::log(static_cast<double>(K)) + std::log1p(-gamma)) +
                 N * std::log(sc) + n * std::log(static_cast<double>(K)) +
                 s.logdet_corr + N);
}

FitResult make_result(const DesignMatrix& dm, const Engine& eng,
                      const Engine::Solve& s, double gamma) {
  FitResult fit;
  fit.structure = dm.structure;
  fit.beta = s.beta;
  fit.unscaled_information = s.info;
  fit.gamma_used = gamma;
  fit.n_clusters = eng.n_clusters();
  fit.n_obs = eng.n();
  fit.n_treatment_cols = dm.n_treatment_cols;
  fit.n_mean_params = eng.p();
  return fit;
}

double ssw_included(const DesignMatrix& dm, const TrialData& trial) {
  double ssw = 0.0;
  for (Eigen::Index r = 0; r < trial.individuals.rows(); ++r) {
    if (!dm.included[r]) continue;
    const double m = trial.individuals.row(r).mean();
    ssw += (trial.individuals.row(r).array() - m).square().sum();
  }
  return ssw;
}

}  // namespace

FitResult fit_gls(const DesignMatrix& dm, const Eigen::MatrixXd& cell_means,
                  double gamma) {
  Engine eng(dm, cell_means);
  const auto s = eng.solve(gamma);
  FitResult fit = make_result(dm, eng, s, gamma);
  fit.scale = s.rss / (eng.n() - eng.p());
  fit.scale_source = ScaleSource::CellResidual;
  fit.n_var_params = 1;
  fit.log_likelihood = ml_means(s, eng.n());
  return fit;
}

FitResult fit_gls(const DesignMatrix& dm, const Eigen::MatrixXd& cell_means,
                  const CorrelationSpec& components, int cell_size) {
  const double gamma = gamma_of(components, cell_size);
  Engine eng(dm, cell_means);
  const auto s = eng.solve(gamma);
  FitResult fit = make_result(dm, eng, s, gamma);
  fit.scale = cell_variance(components, cell_size);
  fit.scale_source = ScaleSource::Known;
  fit.n_var_params = 0;
  fit.log_likelihood = ml_means(s, eng.n());
  return fit;
}

FitResult fit_gls(const DesignMatrix& dm, const TrialData& trial, double gamma) {
  Engine eng(dm, trial.cell_means);
  const auto s = eng.solve(gamma);
  const double ssw = ssw_included(dm, trial);
  const int K = trial.cell_size;
  FitResult fit = make_result(dm, eng, s, gamma);
  fit.scale = pooled_scale(s, gamma, ssw, K, eng.n(), eng.p(), true);
  fit.scale_source = ScaleSource::PooledResidual;
  fit.n_var_params = 1;
  fit.log_likelihood = ml_pooled(s, gamma, ssw, K, eng.n(), eng.p());
  return fit;
}

namespace {

template <class RemlFn, class MlFn>
FitResult feasible_core(const DesignMatrix& dm, const Engine& eng,
                        RemlFn reml, MlFn ml) {
  if (eng.n_clusters() < 2)
    throw TooFewClusters("feasible GLS needs at least 2 clusters");
  const auto res = brent_maximize(reml, 0.0, kGammaHi, kGammaTol, kMaxIter);
  if (!std::isfinite(res.fx))
    throw NonConvergence("restricted likelihood is degenerate (zero residual variance)");
  const auto s = eng.solve(res.x);
  FitResult fit = make_result(dm, eng, s, res.x);
  fit.gamma_at_boundary = res.at_lower || res.at_upper;
  fit.reml_criterion = res.fx;
  fit.n_var_params = 2;
  const auto ml_res = brent_maximize(ml, 0.0, kGammaHi, kGammaTol, kMaxIter);
  fit.log_likelihood = ml_res.fx;
  return fit;
}

}  // namespace

FitResult fit_feasible_gls(const DesignMatrix& dm, const Eigen::MatrixXd& cell_means) {
  Engine eng(dm, cell_means);
  FitResult fit = feasible_core(
      dm, eng,
      [&](double g) { return reml_means(eng.solve(g), eng.n(), eng.p()); },
      [&](double g) { return ml_means(eng.solve(g), eng.n()); });
  const auto s = eng.solve(fit.gamma_used);
  fit.scale = s.rss / (eng.n() - eng.p());
  fit.scale_source = ScaleSource::CellResidual;
  if (!(fit.scale > 0.0))
    throw NonConvergence("estimated scale is zero");
  return fit;
}

FitResult fit_feasible_gls(const DesignMatrix& dm, const TrialData& trial) {
  Engine eng(dm, trial.cell_means);
  const double ssw = ssw_included(dm, trial);
  const int K = trial.cell_size;
  if (K < 2 && ssw <= 0.0)
    throw TooFewClusters("pooled REML needs cell size >= 2 for within-cell contrasts");
  FitResult fit = feasible_core(
      dm, eng,
      [&](double g) { return reml_pooled(eng.solve(g), g, ssw, K, eng.n(), eng.p()); },
      [&](double g) { return ml_pooled(eng.solve(g), g, ssw, K, eng.n(), eng.p()); });
  const auto s = eng.solve(fit.gamma_used);
  fit.scale = pooled_scale(s, fit.gamma_used, ssw, K, eng.n(), eng.p(), true);
  fit.scale_source = ScaleSource::PooledResidual;
  if (!(fit.scale > 0.0))
    throw NonConvergence("estimated scale is zero");
  return fit;
}

double aggregate_etate(const FitResult& fit) {
  if (fit.structure != Structure::ExposureVarying)
    throw WrongStructure("ETATE requires an ETI fit");
  return fit.beta.head(fit.n_treatment_cols).mean();
}

double aggregate_ctate(const FitResult& fit) {
  if (fit.structure != Structure::CalendarVarying)
    throw WrongStructure("CTATE requires a CTI fit");
  return fit.beta.head(fit.n_treatment_cols).mean();
}

double scalar_estimate(const FitResult& fit) {
  switch (fit.structure) {
    case Structure::Immediate: return fit.beta[0];
    case Structure::ExposureVarying: return aggregate_etate(fit);
    case Structure::CalendarVarying: return aggregate_ctate(fit);
  }
  throw WrongStructure("unreachable");
}

std::pair<double, double> information_criteria(const FitResult& fit, int n_obs) {
  if (!fit.log_likelihood)
    throw MissingLikelihood("fit carries no maximized log-likelihood");
  const double ll = *fit.log_likelihood;
  const double p = fit.n_mean_params + fit.n_var_params;
  return {-2.0 * ll + 2.0 * p, -2.0 * ll + p * std::log(static_cast<double>(n_obs))};
}

}  // namespace swcrt
