#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "swcrt/correlation.hpp"

using namespace swcrt;

TEST_CASE("gamma: exchangeable, nested, independence") {
  CorrelationSpec ex{CorrelationKind::Exchangeable, 1.0 / 9.0, 0.0, 1.0};
  CHECK(gamma_of(ex, 30) == doctest::Approx(10.0 / 13.0).epsilon(1e-12));

  CorrelationSpec ind{CorrelationKind::Independence, 5.0, 1.0, 2.0};
  CHECK(gamma_of(ind, 10) == 0.0);

  CorrelationSpec ne{CorrelationKind::NestedExchangeable, 1.0 / 9.0, 1.0 / 9.0, 1.0};
  CHECK(gamma_of(ne, 30) == doctest::Approx(10.0 / 23.0).epsilon(1e-12));

  CorrelationSpec bad = ex;
  bad.sigma_e_sq = 0.0;
  CHECK_THROWS_AS(gamma_of(bad, 30), InvalidVariance);
}

TEST_CASE("gamma boundary clamp and monotonicity") {
  CorrelationSpec near{CorrelationKind::Exchangeable, 1.0, 0.0, 1e-18};
  CHECK(gamma_of(near, 1) <= kGammaCap);

  double prev = -1.0;
  for (double tau : {0.0, 0.05, 0.2, 1.0, 5.0}) {
    CorrelationSpec s{CorrelationKind::Exchangeable, tau, 0.0, 1.0};
    const double g = gamma_of(s, 10);
    CHECK(g >= prev);
    prev = g;
  }
  prev = 2.0;
  for (double sig : {0.1, 0.5, 1.0, 4.0}) {
    CorrelationSpec s{CorrelationKind::Exchangeable, 0.5, 0.0, sig};
    const double g = gamma_of(s, 10);
    CHECK(g <= prev);
    prev = g;
  }
}

TEST_CASE("correlation matrix basics") {
  CHECK(cluster_correlation_matrix(0.0, 4).isApprox(Eigen::MatrixXd::Identity(4, 4)));

  const Eigen::MatrixXd r = cluster_correlation_matrix(0.5, 2);
  CHECK(r(0, 0) == 1.0);
  CHECK(r(0, 1) == 0.5);
  CHECK(r(1, 0) == 0.5);

  CHECK_THROWS_AS(cluster_correlation_matrix(1.0, 3), InvalidGamma);
  CHECK_THROWS_AS(cluster_correlation_matrix(-0.1, 3), InvalidGamma);
}

TEST_CASE("exchangeable spectrum: two eigenvalues") {
  // eigen-oracle for the J=10, gamma=10/13 block
  const double g = 10.0 / 13.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cluster_correlation_matrix(g, 10));
  CHECK(es.eigenvalues().minCoeff() == doctest::Approx(1.0 - g).epsilon(1e-12));
  CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(1.0 + 9.0 * g).epsilon(1e-12));
  // multiplicities: J-1 copies of 1-gamma
  int small = 0;
  for (Eigen::Index i = 0; i < 10; ++i)
    if (std::abs(es.eigenvalues()[i] - (1.0 - g)) < 1e-10) ++small;
  CHECK(small == 9);
}

TEST_CASE("precision matrix closed form") {
  CHECK(cluster_precision_matrix(0.0, 5).isApprox(Eigen::MatrixXd::Identity(5, 5)));

  const Eigen::MatrixXd w = cluster_precision_matrix(0.5, 2);
  CHECK(w(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(w(0, 1) == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));

  // numeric inversion oracle at the section-5 gamma
  const double g = 10.0 / 13.0;
  const Eigen::MatrixXd r = cluster_correlation_matrix(g, 10);
  const Eigen::MatrixXd prod = r * cluster_precision_matrix(g, 10);
  CHECK((prod - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("precision x correlation = identity across the grid") {
  for (int J = 3; J <= 12; ++J) {
    for (double g = 0.0; g < 0.95; g += 0.1) {
      const Eigen::MatrixXd prod =
          cluster_correlation_matrix(g, J) * cluster_precision_matrix(g, J);
      CHECK((prod - Eigen::MatrixXd::Identity(J, J)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("icc and cell variance diagnostics") {
  CorrelationSpec ex{CorrelationKind::Exchangeable, 1.0 / 9.0, 0.0, 1.0};
  CHECK(icc(ex) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(cell_variance(ex, 30) == doctest::Approx(1.0 / 9.0 + 1.0 / 30.0).epsilon(1e-12));
}
