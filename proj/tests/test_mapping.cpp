#include <catch2/catch_amalgamated.hpp>

#include "corrda/mapping.hpp"
#include "oracles.hpp"

using corrda::CorrespondenceMatrix;

TEST_CASE("mapping: identity data yields the ridge-shrunk identity") {
  // Xs = Xt = C = I3: W = (I + 0.001 I)^-1 = I / 1.001.
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
  CorrespondenceMatrix c;
  c.values = eye;
  const auto map = corrda::fit_mapping(eye, c, eye, 1e-3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double expect = i == j ? 1.0 / 1.001 : 0.0;
      REQUIRE(map.w(i, j) == Catch::Approx(expect).margin(1e-14));
    }
}

TEST_CASE("mapping: recovers a planted linear map up to ridge shrinkage") {
  corrda::Rng rng(61);
  Eigen::MatrixXd xs(50, 3), w0(3, 3);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 3; ++j) xs(i, j) = rng.normal();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) w0(i, j) = rng.normal();
  CorrespondenceMatrix c;
  c.values = Eigen::MatrixXd::Identity(50, 50);
  const auto map = corrda::fit_mapping(xs, c, xs * w0, 1e-3);
  REQUIRE((map.w - w0).cwiseAbs().maxCoeff() < 5e-3);
  REQUIRE((map.apply(xs) - xs * w0).cwiseAbs().maxCoeff() < 5e-3);
}

TEST_CASE("mapping: minimizes the ridge objective") {
  corrda::Rng rng(62);
  Eigen::MatrixXd xs(12, 2), xt(9, 2);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 2; ++j) xs(i, j) = rng.normal();
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 2; ++j) xt(i, j) = rng.normal();
  CorrespondenceMatrix c;
  c.values = oracles::random_feasible(rng, 12, 9);
  const double ridge = 0.05;
  const auto map = corrda::fit_mapping(xs, c, xt, ridge);

  const auto loss = [&](const Eigen::MatrixXd& w) {
    return (xs * w - c.values * xt).squaredNorm() + ridge * w.squaredNorm();
  };
  const double at_fit = loss(map.w);
  for (int rep = 0; rep < 30; ++rep) {
    Eigen::MatrixXd delta(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) delta(i, j) = 0.01 * rng.normal();
    REQUIRE(at_fit <= loss(map.w + delta) + 1e-12);
  }

  // and matches the normal equations solved by an unrelated decomposition
  Eigen::MatrixXd normal = xs.transpose() * xs;
  normal.diagonal().array() += ridge;
  const Eigen::MatrixXd direct =
      normal.fullPivLu().solve(xs.transpose() * (c.values * xt));
  REQUIRE((map.w - direct).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("mapping: argument validation") {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
  CorrespondenceMatrix c;
  c.values = eye;
  REQUIRE_THROWS_AS(corrda::fit_mapping(eye, c, eye, 0.0), corrda::data_error);
  REQUIRE_THROWS_AS(corrda::fit_mapping(eye, c, eye, -1.0), corrda::data_error);

  CorrespondenceMatrix wrong;
  wrong.values = Eigen::MatrixXd::Identity(3, 4);
  REQUIRE_THROWS_AS(corrda::fit_mapping(eye, wrong, eye, 1e-3), corrda::data_error);

  const auto map = corrda::fit_mapping(eye, c, eye, 1e-3);
  Eigen::MatrixXd bad(2, 4);
  bad.setZero();
  REQUIRE_THROWS_AS(map.apply(bad), corrda::data_error);
}
