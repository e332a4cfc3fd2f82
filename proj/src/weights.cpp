#include "swcrt/weights.hpp"

#include <cmath>
#include <numeric>

#include "swcrt/correlation.hpp"

namespace swcrt {

namespace {

// The lambda rows are solved in long double: near gamma = 1 the normal
// equations have condition ~1/(1-gamma) and plain double leaves ~1e-8
// residual error against the 1e-9 closed-form tolerances.
using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

LMatrix precision_block(long double gamma, int m) {
  const long double off = -gamma / ((1.0L + (m - 1) * gamma) * (1.0L - gamma));
  LMatrix w = LMatrix::Constant(m, m, off);
  w.diagonal().array() = 1.0L / (1.0L - gamma) + off;
  return w;
}

std::vector<int> index_labels(Structure truth, int J, bool trim_last_exposure) {
  std::vector<int> idx;
  switch (truth) {
    case Structure::Immediate:
      idx = {1};
      break;
    case Structure::ExposureVarying: {
      const int hi = trim_last_exposure ? J - 2 : J - 1;
      idx.resize(hi);
      std::iota(idx.begin(), idx.end(), 1);
      break;
    }
    case Structure::CalendarVarying:
      idx.resize(J - 2);
      std::iota(idx.begin(), idx.end(), 2);
      break;
  }
  return idx;
}

}  // namespace

WeightProfile w1_exposure_weights(int Q, double gamma) {
  if (Q < 2) throw DegenerateDesign("w1 needs Q >= 2");
  check_gamma(gamma);
  const double denom = Q * (Q + 1.0) * (gamma * Q * Q + 2.0 * Q - gamma * Q - 2.0);
  WeightProfile p;
  p.analysis = Structure::Immediate;
  p.truth = Structure::ExposureVarying;
  p.gamma = gamma;
  p.method = WeightMethod::Analytic;
  p.indices = index_labels(Structure::ExposureVarying, Q + 1, false);
  p.weights.resize(Q);
  for (int s = 1; s <= Q; ++s)
    p.weights[s - 1] = 6.0 * (s - Q - 1.0) *
                       ((1.0 + 2.0 * gamma * Q) * s - (1.0 + gamma + gamma * Q) * Q) /
                       denom;
  return p;
}

WeightProfile w2_calendar_weights(int Q) {
  if (Q < 2) throw DegenerateDesign("w2 needs Q >= 2");
  WeightProfile p;
  p.analysis = Structure::Immediate;
  p.truth = Structure::CalendarVarying;
  p.gamma = 0.0;  // gamma-independent
  p.method = WeightMethod::Analytic;
  p.indices = index_labels(Structure::CalendarVarying, Q + 1, false);
  p.weights.resize(Q - 1);
  for (int j = 2; j <= Q; ++j)
    p.weights[j - 2] = 6.0 * (j - 1.0) * (Q + 1.0 - j) / (Q * (Q + 1.0) * (Q - 1.0));
  return p;
}

Eigen::VectorXd lambda_cell_weights(const DesignSpec& design, Structure analysis,
                                    double gamma, FinalPeriodRows cti_rows,
                                    std::vector<DesignRow>* rows_out) {
  check_gamma(gamma);
  const int J = design.n_periods;
  const bool exclude = analysis == Structure::CalendarVarying &&
                       cti_rows == FinalPeriodRows::Exclude;
  const DesignMatrix dm = design_matrix(design, analysis, exclude);

  const int n_rows = static_cast<int>(dm.rows.size());
  const int p = dm.n_cols();
  const long double g = gamma;

  // normal equations over included rows, cluster by cluster
  LMatrix info = LMatrix::Zero(p, p);
  LMatrix zw = LMatrix::Zero(p, n_rows);  // Z'W, columns aligned with dm.rows
  const int mj = exclude ? J - 1 : J;
  const LMatrix wblk = precision_block(g, mj);
  for (int c = 0; c < design.n_clusters; ++c) {
    LMatrix zi(mj, p);
    std::vector<int> cols;
    cols.reserve(mj);
    for (int j = 0; j < J; ++j) {
      const int row = c * J + j;
      if (!dm.included[row]) continue;
      zi.row(static_cast<int>(cols.size())) = dm.X.row(row).cast<long double>();
      cols.push_back(row);
    }
    info.noalias() += zi.transpose() * wblk * zi;
    const LMatrix ziw = zi.transpose() * wblk;  // p x mj
    for (int k = 0; k < mj; ++k) zw.col(cols[k]) += ziw.col(k);
  }

  Eigen::FullPivLU<LMatrix> lu(info);
  if (!lu.isInvertible())
    throw SingularDesign("lambda engine: normal equations are singular");
  const LMatrix lambda = lu.solve(zw);  // p x n_rows, rows = coefficients

  // scalar-summary row: theta's own row for IT, the unweighted mean of the
  // treatment-coefficient rows for ETATE/CTATE
  LVector lam = LVector::Zero(n_rows);
  if (analysis == Structure::Immediate) {
    lam = lambda.row(0).transpose();
  } else {
    for (int k = 0; k < dm.n_treatment_cols; ++k)
      lam += lambda.row(k).transpose();
    lam /= static_cast<long double>(dm.n_treatment_cols);
  }
  if (rows_out) *rows_out = dm.rows;
  return lam.cast<double>();
}

WeightProfile lambda_weights(const DesignSpec& design, Structure analysis,
                             Structure truth, double gamma,
                             FinalPeriodRows cti_rows) {
  const int J = design.n_periods;
  std::vector<DesignRow> rows;
  const Eigen::VectorXd lam =
      lambda_cell_weights(design, analysis, gamma, cti_rows, &rows);
  const int n_rows = static_cast<int>(rows.size());

  // collapse cells against the truth structure (period effects annihilate)
  WeightProfile prof;
  prof.analysis = analysis;
  prof.truth = truth;
  prof.gamma = gamma;
  prof.method = WeightMethod::Numeric;
  prof.indices = index_labels(truth, J, false);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<int>(prof.indices.size()));
  for (int r = 0; r < n_rows; ++r) {
    const auto& row = rows[static_cast<size_t>(r)];
    if (row.period <= row.sequence) continue;  // untreated cell
    switch (truth) {
      case Structure::Immediate:
        acc[0] += lam[r];
        break;
      case Structure::ExposureVarying:
        acc[row.period - row.sequence - 1] += lam[r];
        break;
      case Structure::CalendarVarying:
        if (row.period <= J - 1) acc[row.period - 2] += lam[r];  // xi_J = 0
        break;
    }
  }
  prof.weights = acc;
  return prof;
}

WeightProfile w3_etate_weights(const DesignSpec& design, double gamma) {
  WeightProfile p = lambda_weights(design, Structure::ExposureVarying,
                                   Structure::CalendarVarying, gamma);
  return p;
}

WeightProfile w4_ctate_weights(const DesignSpec& design, double gamma) {
  WeightProfile p = lambda_weights(design, Structure::CalendarVarying,
                                   Structure::ExposureVarying, gamma,
                                   FinalPeriodRows::Exclude);
  // exposure s = J-1 occurs only in the excluded period J; drop its zero slot
  p.indices.pop_back();
  p.weights.conservativeResize(p.weights.size() - 1);
  return p;
}

double expected_misspecified_estimate(const WeightProfile& profile,
                                      const TreatmentStructure& truth) {
  if (profile.truth != truth.kind())
    throw DimensionMismatch("weight profile is for a different truth structure");
  Eigen::VectorXd effects(profile.indices.size());
  switch (truth.kind()) {
    case Structure::Immediate:
      effects.setConstant(truth.theta());
      break;
    case Structure::ExposureVarying:
      for (size_t k = 0; k < profile.indices.size(); ++k) {
        const int s = profile.indices[k];
        if (s < 1 || s > truth.delta().size())
          throw DimensionMismatch("exposure index outside the truth vector");
        effects[static_cast<Eigen::Index>(k)] = truth.delta()[s - 1];
      }
      break;
    case Structure::CalendarVarying:
      for (size_t k = 0; k < profile.indices.size(); ++k) {
        const int j = profile.indices[k];
        if (j < 2 || j - 2 >= truth.xi().size())
          throw DimensionMismatch("calendar index outside the truth vector");
        effects[static_cast<Eigen::Index>(k)] = truth.xi()[j - 2];
      }
      break;
  }
  return profile.weights.dot(effects);
}

std::string family_name(WeightFamily f) {
  switch (f) {
    case WeightFamily::W1: return "w1";
    case WeightFamily::W2: return "w2";
    case WeightFamily::W3: return "w3";
    case WeightFamily::W4: return "w4";
  }
  return "?";
}

WeightFamily family_from_name(const std::string& name) {
  if (name == "w1") return WeightFamily::W1;
  if (name == "w2") return WeightFamily::W2;
  if (name == "w3") return WeightFamily::W3;
  if (name == "w4") return WeightFamily::W4;
  throw ValidationError("unknown weight family '" + name + "'");
}

std::vector<WeightCurveRow> weight_curve_table(WeightFamily family,
                                               const std::vector<int>& q_list,
                                               const std::vector<double>& gamma_list) {
  if (q_list.empty()) throw ValidationError("empty Q grid");
  if (gamma_list.empty()) throw ValidationError("empty gamma grid");
  std::vector<WeightCurveRow> rows;
  for (int Q : q_list) {
    const int J = Q + 1;
    // figure-caption scalings: (J-1) for w1, (J-2) for the others
    const double scale = family == WeightFamily::W1 ? J - 1.0 : J - 2.0;
    const DesignSpec design = build_design(Q, J, 1);
    for (double g : gamma_list) {
      WeightProfile p;
      switch (family) {
        case WeightFamily::W1: p = w1_exposure_weights(Q, g); break;
        case WeightFamily::W2: p = w2_calendar_weights(Q); break;
        case WeightFamily::W3: p = w3_etate_weights(design, g); break;
        case WeightFamily::W4: p = w4_ctate_weights(design, g); break;
      }
      for (Eigen::Index k = 0; k < p.weights.size(); ++k)
        rows.push_back({family, Q, g, p.indices[static_cast<size_t>(k)],
                        p.weights[k], scale * p.weights[k]});
    }
  }
  return rows;
}

}  // namespace swcrt
