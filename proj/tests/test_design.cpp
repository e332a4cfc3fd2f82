#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "swcrt/design.hpp"

using namespace swcrt;

TEST_CASE("build_design: section-5 and 3x4 geometries") {
  const DesignSpec d1 = build_design(18, 10, 30);
  CHECK(d1.n_sequences == 9);
  CHECK(d1.clusters_per_sequence == 2);

  const DesignSpec d2 = build_design(3, 4, 1);
  CHECK(d2.n_sequences == 3);
  CHECK(d2.clusters_per_sequence == 1);

  CHECK_THROWS_AS(build_design(4, 4, 1), NonDivisibleAllocation);
  CHECK_THROWS_AS(build_design(1, 2, 1), DegenerateDesign);
}

TEST_CASE("treatment indicator and exposure time") {
  const DesignSpec d = build_design(9, 10, 1);
  CHECK(treatment_indicator(d, 1, 1) == 0);
  CHECK(treatment_indicator(d, 1, 2) == 1);
  CHECK(treatment_indicator(d, 3, 3) == 0);
  CHECK(exposure_time(d, 1, 4) == 3);
  CHECK(exposure_time(d, 3, 3) == 0);
  CHECK(exposure_time(d, 2, 3) == 1);
  CHECK_THROWS_AS(treatment_indicator(d, 0, 1), IndexOutOfRange);
  CHECK_THROWS_AS(exposure_time(d, 1, 11), IndexOutOfRange);
}

TEST_CASE("round-robin sequence assignment") {
  const DesignSpec d = build_design(18, 10, 30);
  CHECK(sequence_of_cluster(d, 1) == 1);
  CHECK(sequence_of_cluster(d, 9) == 9);
  CHECK(sequence_of_cluster(d, 10) == 1);
  CHECK(sequence_of_cluster(d, 18) == 9);
}

namespace {

int svd_rank(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const double tol = 1e-10 * svd.singularValues()[0];
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > tol) ++r;
  return r;
}

Eigen::MatrixXd included_rows(const DesignMatrix& dm) {
  Eigen::MatrixXd out(dm.n_included(), dm.n_cols());
  int r = 0;
  for (size_t i = 0; i < dm.rows.size(); ++i)
    if (dm.included[i]) out.row(r++) = dm.X.row(static_cast<Eigen::Index>(i));
  return out;
}

}  // namespace

TEST_CASE("design_matrix shapes and rank") {
  const DesignSpec d = build_design(3, 4, 1);

  const DesignMatrix eti = design_matrix(d, Structure::ExposureVarying);
  CHECK(eti.X.rows() == 12);
  CHECK(eti.n_cols() == 7);
  CHECK(svd_rank(eti.X) == 7);  // independent rank oracle

  const DesignMatrix cti = design_matrix(d, Structure::CalendarVarying);
  CHECK(cti.n_cols() == 6);  // (J-2) + J

  const DesignMatrix it = design_matrix(d, Structure::Immediate);
  CHECK(it.X.col(0).sum() == doctest::Approx(6.0));  // treated cells in the wedge
}

TEST_CASE("design_matrix: masked CTI variant stays full rank") {
  const DesignSpec d = build_design(3, 4, 1);
  const DesignMatrix cti = design_matrix(d, Structure::CalendarVarying, true);
  CHECK(cti.n_period_cols == 3);  // period-J column dropped with its rows
  CHECK(cti.n_included() == 9);
  const Eigen::MatrixXd active = included_rows(cti);
  CHECK(svd_rank(active) == cti.n_cols());
}

TEST_CASE("treated-cell count identity across designs") {
  for (int J : {3, 4, 7, 10}) {
    for (int mult : {1, 2, 3}) {
      const int I = (J - 1) * mult;
      const DesignSpec d = build_design(I, J, 1);
      // direct count over the wedge
      int direct = 0;
      for (int c = 1; c <= I; ++c) {
        const int q = sequence_of_cluster(d, c);
        for (int j = 1; j <= J; ++j)
          if (j > q) ++direct;
      }
      CHECK(treated_cell_count(d) == direct);
      CHECK(direct == I * J / 2);  // complete design with Q = J-1
    }
  }
}

TEST_CASE("ETI columns partition treated rows at s = j - q") {
  const DesignSpec d = build_design(9, 10, 1);
  const DesignMatrix eti = design_matrix(d, Structure::ExposureVarying);
  for (size_t r = 0; r < eti.rows.size(); ++r) {
    const auto& row = eti.rows[r];
    const double tx_sum = eti.X.row(static_cast<Eigen::Index>(r))
                              .head(eti.n_treatment_cols)
                              .sum();
    if (row.period > row.sequence) {
      CHECK(tx_sum == doctest::Approx(1.0));
      CHECK(eti.X(static_cast<Eigen::Index>(r),
                  row.period - row.sequence - 1) == doctest::Approx(1.0));
    } else {
      CHECK(tx_sum == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("IT treatment column is the OR of ETI columns and of CTI columns") {
  const DesignSpec d = build_design(6, 4, 1);
  const DesignMatrix it = design_matrix(d, Structure::Immediate);
  const DesignMatrix eti = design_matrix(d, Structure::ExposureVarying);
  const DesignMatrix cti = design_matrix(d, Structure::CalendarVarying);
  const int J = d.n_periods;
  for (Eigen::Index r = 0; r < it.X.rows(); ++r) {
    const double eti_any = eti.X.row(r).head(eti.n_treatment_cols).sum();
    CHECK(it.X(r, 0) == doctest::Approx(eti_any));
    const bool period_j_treated =
        it.rows[static_cast<size_t>(r)].period == J && it.X(r, 0) > 0.5;
    const double cti_any =
        cti.X.row(r).head(cti.n_treatment_cols).sum() + (period_j_treated ? 1.0 : 0.0);
    CHECK(it.X(r, 0) == doctest::Approx(cti_any));
  }
}

TEST_CASE("every included row carries exactly one period indicator") {
  const DesignSpec d = build_design(9, 10, 1);
  for (Structure s : {Structure::Immediate, Structure::ExposureVarying,
                      Structure::CalendarVarying}) {
    for (bool excl : {false, true}) {
      if (excl && s != Structure::CalendarVarying) continue;
      const DesignMatrix dm = design_matrix(d, s, excl);
      for (size_t r = 0; r < dm.rows.size(); ++r) {
        if (!dm.included[r]) continue;
        CHECK(dm.X.row(static_cast<Eigen::Index>(r))
                  .tail(dm.n_period_cols)
                  .sum() == doctest::Approx(1.0));
      }
    }
  }
}

TEST_CASE("treatment structure payloads are tag-checked") {
  const auto im = TreatmentStructure::immediate(6.0);
  CHECK(im.theta() == 6.0);
  CHECK_THROWS_AS(im.delta(), WrongStructure);

  Eigen::VectorXd delta(3);
  delta << 1, 2, 3;
  const auto eti = TreatmentStructure::exposure_varying(delta);
  CHECK(eti.delta()[2] == 3.0);
  CHECK_THROWS_AS(eti.xi(), WrongStructure);

  Eigen::VectorXd xi(2);
  xi << 4, 2;
  const auto cti = TreatmentStructure::calendar_varying(xi);
  CHECK(cti.effect_at(1, 2, 4) == 4.0);
  CHECK(cti.effect_at(1, 4, 4) == 0.0);  // xi_J = 0
  CHECK(cti.effect_at(3, 3, 4) == 0.0);  // untreated
}
