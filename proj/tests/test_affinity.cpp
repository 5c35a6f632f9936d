#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "corrda/affinity.hpp"
#include "oracles.hpp"

TEST_CASE("sigma heuristic: frozen hand-computed values") {
  Eigen::MatrixXd two(2, 2);
  two << 0.0, 0.0, 2.0, 0.0;
  REQUIRE(corrda::heuristic_sigma(two) == Catch::Approx(2.0).margin(1e-14));

  // collinear 0, 1, 2: pair distances 1, 2, 1 -> mean 4/3
  Eigen::MatrixXd three(3, 1);
  three << 0.0, 1.0, 2.0;
  REQUIRE(corrda::heuristic_sigma(three) == Catch::Approx(4.0 / 3.0).margin(1e-14));
}

TEST_CASE("sigma heuristic: equals the mean over unordered pairs") {
  corrda::Rng rng(21);
  Eigen::MatrixXd x(9, 3);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 3; ++j) x(i, j) = rng.normal();
  double sum = 0.0;
  int pairs = 0;
  for (int i = 0; i < 9; ++i)
    for (int j = i + 1; j < 9; ++j) {
      sum += (x.row(i) - x.row(j)).norm();
      ++pairs;
    }
  REQUIRE(corrda::heuristic_sigma(x) == Catch::Approx(sum / pairs).epsilon(1e-12));
}

TEST_CASE("sigma heuristic: degenerate inputs are rejected") {
  Eigen::MatrixXd one(1, 2);
  one << 1.0, 2.0;
  REQUIRE_THROWS_AS(corrda::heuristic_sigma(one), corrda::data_error);
  Eigen::MatrixXd same(3, 2);
  same << 1.0, 2.0, 1.0, 2.0, 1.0, 2.0;
  REQUIRE_THROWS_WITH(corrda::heuristic_sigma(same),
                      Catch::Matchers::ContainsSubstring("sigma"));
}

TEST_CASE("affinity: frozen kernel value, zero diagonal, symmetry") {
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 1.0;
  const auto a = corrda::build_affinity(x, 1.0);
  REQUIRE(a.sigma == 1.0);
  REQUIRE(a.values(0, 0) == 0.0);
  REQUIRE(a.values(1, 1) == 0.0);
  REQUIRE(a.values(0, 1) == Catch::Approx(std::exp(-1.0)).margin(1e-15));
  REQUIRE(a.values(0, 1) == a.values(1, 0));
}

TEST_CASE("affinity: matches a scalar-loop oracle on random data") {
  corrda::Rng rng(22);
  Eigen::MatrixXd x(11, 4);
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 4; ++j) x(i, j) = rng.normal();
  const double sigma = 1.7;
  const auto a = corrda::build_affinity(x, sigma);
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) {
      const double expect =
          i == j ? 0.0
                 : std::exp(-(x.row(i) - x.row(j)).squaredNorm() / (sigma * sigma));
      REQUIRE(a.values(i, j) == Catch::Approx(expect).margin(1e-12));
    }
  REQUIRE((a.values - a.values.transpose()).cwiseAbs().maxCoeff() == 0.0);
  // default sigma is the heuristic
  const auto b = corrda::build_affinity(x);
  REQUIRE(b.sigma == Catch::Approx(corrda::heuristic_sigma(x)).epsilon(1e-15));
}

TEST_CASE("affinity: sample-set overload and argument checks") {
  corrda::Rng rng(23);
  const corrda::SampleSet s = oracles::random_samples(rng, 7, 2, 2);
  const auto a = corrda::build_affinity(s);
  const auto b = corrda::build_affinity(s.features);
  REQUIRE((a.values.array() == b.values.array()).all());

  Eigen::MatrixXd x(3, 2);
  x.setRandom();
  REQUIRE_THROWS_AS(corrda::build_affinity(x, 0.0), corrda::data_error);
  REQUIRE_THROWS_AS(corrda::build_affinity(x, -2.0), corrda::data_error);
  Eigen::MatrixXd one(1, 2);
  one << 0.0, 0.0;
  REQUIRE_THROWS_AS(corrda::build_affinity(one), corrda::data_error);
}

TEST_CASE("cross cost: frozen 3-4-5 distance and loop oracle") {
  Eigen::MatrixXd src(1, 2), tgt(1, 2);
  src << 0.0, 0.0;
  tgt << 3.0, 4.0;
  const auto c = corrda::build_cross_cost(src, tgt);
  REQUIRE(c.values.rows() == 1);
  REQUIRE(c.values.cols() == 1);
  REQUIRE(c.values(0, 0) == Catch::Approx(5.0).margin(1e-14));

  corrda::Rng rng(24);
  Eigen::MatrixXd a(6, 3), b(8, 3);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = rng.normal();
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 3; ++j) b(i, j) = rng.normal();
  const auto cc = corrda::build_cross_cost(a, b);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 8; ++j)
      REQUIRE(cc.values(i, j) ==
              Catch::Approx((a.row(i) - b.row(j)).norm()).margin(1e-12));

  Eigen::MatrixXd wrong(2, 4);
  wrong.setZero();
  REQUIRE_THROWS_AS(corrda::build_cross_cost(a, wrong), corrda::data_error);
}
