#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "swcrt/errors.hpp"

namespace swcrt {

// Geometry of a complete stepped-wedge design: Q = J-1 sequences with equal
// allocation; sequence q crosses over to treatment at the start of period q+1.
// All indices on the public surface are 1-based (clusters, sequences, periods,
// exposure times); internal storage is 0-based.
struct DesignSpec {
  int n_clusters = 0;            // I
  int n_periods = 0;             // J
  int n_sequences = 0;           // Q = J - 1
  int clusters_per_sequence = 0; // I / Q
  int cell_size = 0;             // K individuals per cluster-period cell
};

DesignSpec build_design(int n_clusters, int n_periods, int cell_size);

// Round-robin assignment: cluster c (1-based) belongs to sequence ((c-1) mod Q)+1.
int sequence_of_cluster(const DesignSpec& design, int cluster);

// I(j > q): 1 iff sequence q is treated in period j.
int treatment_indicator(const DesignSpec& design, int q, int j);

// Periods since crossover: j - q when treated, 0 when unexposed.
int exposure_time(const DesignSpec& design, int q, int j);

int treated_cell_count(const DesignSpec& design);

enum class Structure { Immediate, ExposureVarying, CalendarVarying };

// "IT" / "ETI" / "CTI" (analysis model names).
std::string structure_name(Structure s);
// "IT" / "ETATE" / "CTATE" (the scalar estimator each model yields).
std::string estimator_name(Structure s);
Structure structure_from_name(const std::string& name);

// Tagged treatment-effect specification; exactly one payload is populated.
//   Immediate:        scalar theta
//   ExposureVarying:  delta_s for s = 1..J-1
//   CalendarVarying:  xi_j for j = 2..J-1 (xi_J is fixed to 0 and not stored)
class TreatmentStructure {
 public:
  static TreatmentStructure immediate(double theta);
  static TreatmentStructure exposure_varying(Eigen::VectorXd delta);
  static TreatmentStructure calendar_varying(Eigen::VectorXd xi);

  Structure kind() const { return kind_; }
  double theta() const;
  const Eigen::VectorXd& delta() const;
  const Eigen::VectorXd& xi() const;

  // Effect experienced by a cell in sequence q, period j of a J-period design.
  double effect_at(int q, int j, int n_periods) const;

 private:
  TreatmentStructure() = default;
  Structure kind_ = Structure::Immediate;
  double theta_ = 0.0;
  Eigen::VectorXd vec_;
};

struct DesignRow {
  int cluster;   // 1-based
  int sequence;  // 1-based
  int period;    // 1-based
};

// Cluster-period design matrix, rows cluster-major/period-minor, columns =
// treatment block followed by period-indicator block. When the final period is
// excluded (Appendix-style CTI weight derivations) the period-J rows are
// masked out and the period-J indicator column -- identically zero on the
// remaining rows -- is dropped, keeping the matrix full column rank.
struct DesignMatrix {
  Structure structure = Structure::Immediate;
  Eigen::MatrixXd X;            // (I*J) x (n_treatment_cols + n_period_cols)
  std::vector<DesignRow> rows;  // one entry per row of X
  std::vector<char> included;   // 0 = masked out of estimation
  int n_treatment_cols = 0;
  int n_period_cols = 0;
  bool final_period_excluded = false;
  std::vector<std::string> column_names;

  int n_cols() const { return n_treatment_cols + n_period_cols; }
  int n_included() const;

  // Contrast mapping coefficients to the scalar estimator: e_theta for IT,
  // the unweighted mean of the treatment block for ETI/CTI.
  Eigen::VectorXd averaging_contrast() const;
};

DesignMatrix design_matrix(const DesignSpec& design, Structure structure,
                           bool exclude_final_period = false);

}  // namespace swcrt
