#include "swcrt/design.hpp"

#include <utility>

namespace swcrt {

DesignSpec build_design(int n_clusters, int n_periods, int cell_size) {
  if (n_periods < 3)
    throw DegenerateDesign("need J >= 3 periods, got J=" + std::to_string(n_periods));
  if (n_clusters < 1 || cell_size < 1)
    throw DegenerateDesign("clusters and cell size must be positive");
  const int q = n_periods - 1;
  if (n_clusters % q != 0)
    throw NonDivisibleAllocation("I=" + std::to_string(n_clusters) +
                                 " not divisible by Q=" + std::to_string(q));
  DesignSpec d;
  d.n_clusters = n_clusters;
  d.n_periods = n_periods;
  d.n_sequences = q;
  d.clusters_per_sequence = n_clusters / q;
  d.cell_size = cell_size;
  return d;
}

int sequence_of_cluster(const DesignSpec& design, int cluster) {
  if (cluster < 1 || cluster > design.n_clusters)
    throw IndexOutOfRange("cluster " + std::to_string(cluster));
  return ((cluster - 1) % design.n_sequences) + 1;
}

static void check_qj(const DesignSpec& design, int q, int j) {
  if (q < 1 || q > design.n_sequences)
    throw IndexOutOfRange("sequence " + std::to_string(q));
  if (j < 1 || j > design.n_periods)
    throw IndexOutOfRange("period " + std::to_string(j));
}

int treatment_indicator(const DesignSpec& design, int q, int j) {
  check_qj(design, q, j);
  return j > q ? 1 : 0;
}

int exposure_time(const DesignSpec& design, int q, int j) {
  check_qj(design, q, j);
  return j > q ? j - q : 0;
}

int treated_cell_count(const DesignSpec& design) {
  int n = 0;
  for (int q = 1; q <= design.n_sequences; ++q)
    n += design.clusters_per_sequence * (design.n_periods - q);
  return n;
}

std::string structure_name(Structure s) {
  switch (s) {
    case Structure::Immediate: return "IT";
    case Structure::ExposureVarying: return "ETI";
    case Structure::CalendarVarying: return "CTI";
  }
  return "?";
}

std::string estimator_name(Structure s) {
  switch (s) {
    case Structure::Immediate: return "IT";
    case Structure::ExposureVarying: return "ETATE";
    case Structure::CalendarVarying: return "CTATE";
  }
  return "?";
}

Structure structure_from_name(const std::string& name) {
  if (name == "IT" || name == "immediate") return Structure::Immediate;
  if (name == "ETI" || name == "exposure") return Structure::ExposureVarying;
  if (name == "CTI" || name == "calendar") return Structure::CalendarVarying;
  throw ValidationError("unknown treatment structure '" + name + "'");
}

TreatmentStructure TreatmentStructure::immediate(double theta) {
  TreatmentStructure t;
  t.kind_ = Structure::Immediate;
  t.theta_ = theta;
  return t;
}

TreatmentStructure TreatmentStructure::exposure_varying(Eigen::VectorXd delta) {
  if (delta.size() < 2)
    throw DimensionMismatch("delta needs J-1 >= 2 entries");
  TreatmentStructure t;
  t.kind_ = Structure::ExposureVarying;
  t.vec_ = std::move(delta);
  return t;
}

TreatmentStructure TreatmentStructure::calendar_varying(Eigen::VectorXd xi) {
  if (xi.size() < 1)
    throw DimensionMismatch("xi needs J-2 >= 1 entries");
  TreatmentStructure t;
  t.kind_ = Structure::CalendarVarying;
  t.vec_ = std::move(xi);
  return t;
}

double TreatmentStructure::theta() const {
  if (kind_ != Structure::Immediate)
    throw WrongStructure("theta is only defined for an immediate structure");
  return theta_;
}

const Eigen::VectorXd& TreatmentStructure::delta() const {
  if (kind_ != Structure::ExposureVarying)
    throw WrongStructure("delta is only defined for an exposure-varying structure");
  return vec_;
}

const Eigen::VectorXd& TreatmentStructure::xi() const {
  if (kind_ != Structure::CalendarVarying)
    throw WrongStructure("xi is only defined for a calendar-varying structure");
  return vec_;
}

double TreatmentStructure::effect_at(int q, int j, int n_periods) const {
  if (j <= q) return 0.0;
  switch (kind_) {
    case Structure::Immediate:
      return theta_;
    case Structure::ExposureVarying: {
      const int s = j - q;
      if (s > vec_.size())
        throw DimensionMismatch("exposure time " + std::to_string(s) +
                                " outside delta of length " + std::to_string(vec_.size()));
      return vec_[s - 1];
    }
    case Structure::CalendarVarying: {
      if (j >= n_periods) return 0.0;  // xi_J = 0 by convention
      if (j - 2 >= vec_.size())
        throw DimensionMismatch("period " + std::to_string(j) +
                                " outside xi of length " + std::to_string(vec_.size()));
      return vec_[j - 2];
    }
  }
  return 0.0;
}

int DesignMatrix::n_included() const {
  int n = 0;
  for (char c : included) n += c ? 1 : 0;
  return n;
}

Eigen::VectorXd DesignMatrix::averaging_contrast() const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n_cols());
  if (structure == Structure::Immediate) {
    c[0] = 1.0;
  } else {
    for (int k = 0; k < n_treatment_cols; ++k) c[k] = 1.0 / n_treatment_cols;
  }
  return c;
}

DesignMatrix design_matrix(const DesignSpec& design, Structure structure,
                           bool exclude_final_period) {
  const int I = design.n_clusters;
  const int J = design.n_periods;
  if (J < 3) throw DegenerateDesign("need J >= 3");

  DesignMatrix dm;
  dm.structure = structure;
  dm.final_period_excluded = exclude_final_period;
  switch (structure) {
    case Structure::Immediate: dm.n_treatment_cols = 1; break;
    case Structure::ExposureVarying: dm.n_treatment_cols = J - 1; break;
    case Structure::CalendarVarying: dm.n_treatment_cols = J - 2; break;
  }
  dm.n_period_cols = exclude_final_period ? J - 1 : J;

  dm.X = Eigen::MatrixXd::Zero(I * J, dm.n_cols());
  dm.rows.reserve(I * J);
  dm.included.assign(I * J, 1);

  for (int c = 1; c <= I; ++c) {
    const int q = sequence_of_cluster(design, c);
    for (int j = 1; j <= J; ++j) {
      const int r = (c - 1) * J + (j - 1);
      dm.rows.push_back({c, q, j});
      const bool treated = j > q;
      if (treated) {
        switch (structure) {
          case Structure::Immediate:
            dm.X(r, 0) = 1.0;
            break;
          case Structure::ExposureVarying:
            dm.X(r, (j - q) - 1) = 1.0;
            break;
          case Structure::CalendarVarying:
            if (j <= J - 1) dm.X(r, j - 2) = 1.0;  // no column for xi_J
            break;
        }
      }
      if (j <= dm.n_period_cols) dm.X(r, dm.n_treatment_cols + (j - 1)) = 1.0;
      if (exclude_final_period && j == J) dm.included[r] = 0;
    }
  }

  switch (structure) {
    case Structure::Immediate:
      dm.column_names.push_back("theta");
      break;
    case Structure::ExposureVarying:
      for (int s = 1; s <= J - 1; ++s)
        dm.column_names.push_back("delta[" + std::to_string(s) + "]");
      break;
    case Structure::CalendarVarying:
      for (int j = 2; j <= J - 1; ++j)
        dm.column_names.push_back("xi[" + std::to_string(j) + "]");
      break;
  }
  for (int j = 1; j <= dm.n_period_cols; ++j)
    dm.column_names.push_back("phi[" + std::to_string(j) + "]");
  return dm;
}

}  // namespace swcrt
