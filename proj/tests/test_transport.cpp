#include <catch2/catch_amalgamated.hpp>
#include <limits>
#include <numeric>
#include <vector>

#include "corrda/dense_lp.hpp"
#include "corrda/transport.hpp"
#include "oracles.hpp"

using corrda::FlowSolution;
using corrda::TransportationInstance;

namespace {

Eigen::MatrixXd random_costs(corrda::Rng& rng, int ns, int nt, double lo, double hi) {
  Eigen::MatrixXd c(ns, nt);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nt; ++j) c(i, j) = lo + (hi - lo) * rng.uniform();
  return c;
}

void check_marginals(const TransportationInstance& inst, const FlowSolution& sol,
                     double tol = 1e-9) {
  REQUIRE(sol.flow.rows() == inst.costs.rows());
  REQUIRE(sol.flow.cols() == inst.costs.cols());
  REQUIRE(sol.flow.minCoeff() >= 0.0);
  for (int i = 0; i < inst.costs.rows(); ++i)
    REQUIRE(sol.flow.row(i).sum() == Catch::Approx(inst.supplies(i)).margin(tol));
  for (int j = 0; j < inst.costs.cols(); ++j)
    REQUIRE(sol.flow.col(j).sum() == Catch::Approx(inst.demands(j)).margin(tol));
}

}  // namespace

TEST_CASE("transport: single source splits across demands at face value") {
  const TransportationInstance inst((Eigen::MatrixXd(1, 2) << 3.0, 5.0).finished(),
                                    Eigen::VectorXd::Constant(1, 1.0),
                                    Eigen::VectorXd::Constant(2, 0.5));
  const auto sol = corrda::solve_network_simplex(inst);
  REQUIRE(sol.flow(0, 0) == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(sol.flow(0, 1) == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(sol.objective == Catch::Approx(4.0).margin(1e-14));
  REQUIRE(sol.basis_size == 2);
}

TEST_CASE("transport: free diagonal routes everything at zero cost") {
  auto inst = TransportationInstance::uniform_marginals((Eigen::MatrixXd(2, 2) << 0.0, 1.0,
                                                         1.0, 0.0)
                                                            .finished());
  const auto sol = corrda::solve_network_simplex(inst);
  REQUIRE(sol.objective == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(sol.flow(0, 0) == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(sol.flow(1, 1) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("transport: negative costs are welcome") {
  auto inst = TransportationInstance::uniform_marginals(
      (Eigen::MatrixXd(2, 2) << -1.0, 0.0, 0.0, -1.0).finished());
  const auto sol = corrda::solve_network_simplex(inst);
  REQUIRE(sol.objective == Catch::Approx(-1.0).margin(1e-14));
}

TEST_CASE("transport: matches exhaustive enumeration on integral instances") {
  corrda::Rng rng(41);
  const std::vector<std::pair<int, int>> shapes{{2, 2}, {2, 3}, {3, 2}, {3, 3}, {1, 4}, {4, 1}, {3, 4}};
  for (const auto& [ns, nt] : shapes) {
    for (int rep = 0; rep < 6; ++rep) {
      const Eigen::MatrixXd costs = random_costs(rng, ns, nt, -3.0, 5.0);
      // integral margins equal on both sides
      const long common = std::lcm(ns, nt);
      std::vector<long> sup(static_cast<std::size_t>(ns), common / ns);
      std::vector<long> dem(static_cast<std::size_t>(nt), common / nt);
      const TransportationInstance inst(
          costs, Eigen::VectorXd::Constant(ns, static_cast<double>(common / ns)),
          Eigen::VectorXd::Constant(nt, static_cast<double>(common / nt)));
      const double best = oracles::enumerate_transport_min(costs, sup, dem);
      const auto ns_sol = corrda::solve_network_simplex(inst);
      const auto ref_sol = corrda::solve_reference(inst);
      const double tol = 1e-11 * (1.0 + std::abs(best));
      REQUIRE(ns_sol.objective == Catch::Approx(best).margin(tol));
      REQUIRE(ref_sol.objective == Catch::Approx(best).margin(tol));
      check_marginals(inst, ns_sol, 1e-12);
    }
  }
}

TEST_CASE("transport: non-uniform integral margins against enumeration") {
  corrda::Rng rng(42);
  for (int rep = 0; rep < 8; ++rep) {
    const int ns = 2 + static_cast<int>(rng.uniform_int(2));
    const int nt = 2 + static_cast<int>(rng.uniform_int(2));
    std::vector<long> sup(static_cast<std::size_t>(ns)), dem(static_cast<std::size_t>(nt));
    long total = 0;
    for (auto& v : sup) {
      v = 1 + static_cast<long>(rng.uniform_int(3));
      total += v;
    }
    long left = total;
    for (std::size_t j = 0; j < dem.size(); ++j) {
      const long max_take = left - static_cast<long>(dem.size() - 1 - j);
      dem[j] = j + 1 == dem.size() ? left : 1 + static_cast<long>(rng.uniform_int(
                                                static_cast<std::uint64_t>(max_take)));
      left -= dem[j];
    }
    const Eigen::MatrixXd costs = random_costs(rng, ns, nt, -2.0, 4.0);
    Eigen::VectorXd supplies(ns), demands(nt);
    for (int i = 0; i < ns; ++i) supplies(i) = static_cast<double>(sup[static_cast<std::size_t>(i)]);
    for (int j = 0; j < nt; ++j) demands(j) = static_cast<double>(dem[static_cast<std::size_t>(j)]);
    const TransportationInstance inst(costs, supplies, demands);
    const double best = oracles::enumerate_transport_min(costs, sup, dem);
    const auto sol = corrda::solve_network_simplex(inst);
    REQUIRE(sol.objective == Catch::Approx(best).margin(1e-10 * (1.0 + std::abs(best))));
    check_marginals(inst, sol, 1e-12);
  }
}

TEST_CASE("transport: matches the best permutation on square uniform instances") {
  corrda::Rng rng(43);
  for (int n : {4, 5, 6}) {
    const Eigen::MatrixXd costs = random_costs(rng, n, n, 0.0, 1.0);
    const auto inst = TransportationInstance::uniform_marginals(costs);
    const auto sol = corrda::solve_network_simplex(inst);
    const double best = oracles::permutation_min(costs);
    REQUIRE(sol.objective == Catch::Approx(best).margin(1e-12 * (1.0 + std::abs(best))));
  }
}

TEST_CASE("transport: three solvers agree on random rectangular instances") {
  corrda::Rng rng(44);
  for (int rep = 0; rep < 10; ++rep) {
    const int ns = 2 + static_cast<int>(rng.uniform_int(11));
    const int nt = 2 + static_cast<int>(rng.uniform_int(16));
    const Eigen::MatrixXd costs = random_costs(rng, ns, nt, -1.0, 1.0);
    const auto inst = TransportationInstance::uniform_marginals(costs);
    const auto a = corrda::solve_network_simplex(inst);
    const auto b = corrda::solve_reference(inst);
    const auto c = corrda::solve_dense_baseline(inst);
    REQUIRE(a.objective == Catch::Approx(b.objective).margin(1e-9));
    REQUIRE(a.objective == Catch::Approx(c.objective).margin(1e-9));
    check_marginals(inst, a);
    check_marginals(inst, c);
  }
}

TEST_CASE("transport: shifting a row or column of costs keeps the plan optimal") {
  corrda::Rng rng(45);
  const Eigen::MatrixXd costs = random_costs(rng, 6, 9, 0.0, 2.0);
  const auto base = TransportationInstance::uniform_marginals(costs);
  const auto base_sol = corrda::solve_network_simplex(base);

  Eigen::MatrixXd shifted = costs;
  shifted.row(2).array() += 3.25;   // constant on a row
  shifted.col(5).array() -= 1.5;    // constant on a column
  const auto moved = TransportationInstance::uniform_marginals(shifted);
  const auto moved_sol = corrda::solve_network_simplex(moved);
  // The feasible set fixes how much mass each row/column carries, so the
  // optimal objective shifts by exactly that amount and the plan stays put.
  const double expect =
      base_sol.objective + 3.25 * base.supplies(2) - 1.5 * base.demands(5);
  REQUIRE(moved_sol.objective == Catch::Approx(expect).epsilon(1e-12));
  REQUIRE((moved_sol.flow - base_sol.flow).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("transport: flat costs terminate despite total degeneracy") {
  const Eigen::MatrixXd costs = Eigen::MatrixXd::Constant(7, 5, 2.5);
  const auto inst = TransportationInstance::uniform_marginals(costs);
  const auto sol = corrda::solve_network_simplex(inst);
  REQUIRE(sol.objective == Catch::Approx(2.5).epsilon(1e-14));
  check_marginals(inst, sol, 1e-12);
}

TEST_CASE("transport: deterministic across repeated solves") {
  corrda::Rng rng(46);
  const Eigen::MatrixXd costs = random_costs(rng, 9, 13, -1.0, 1.0);
  const auto inst = TransportationInstance::uniform_marginals(costs);
  const auto a = corrda::solve_network_simplex(inst);
  const auto b = corrda::solve_network_simplex(inst);
  REQUIRE((a.flow.array() == b.flow.array()).all());
  REQUIRE(a.objective == b.objective);
}

TEST_CASE("transport: instance validation happens at construction") {
  Eigen::MatrixXd costs(2, 2);
  costs << 1.0, 2.0, 3.0, 4.0;
  const Eigen::VectorXd half = Eigen::VectorXd::Constant(2, 0.5);

  REQUIRE_THROWS_AS(
      TransportationInstance(costs, half, Eigen::VectorXd::Constant(2, 0.4)),
      corrda::data_error);  // unbalanced

  Eigen::VectorXd mixed(2);
  mixed << -0.5, 1.5;
  REQUIRE_THROWS_AS(TransportationInstance(costs, mixed, half), corrda::data_error);

  REQUIRE_THROWS_AS(
      TransportationInstance(costs, Eigen::VectorXd::Constant(3, 1.0 / 3.0), half),
      corrda::data_error);  // length mismatch

  Eigen::MatrixXd inf_costs = costs;
  inf_costs(0, 0) = std::numeric_limits<double>::infinity();
  REQUIRE_THROWS_AS(TransportationInstance(inf_costs, half, half), corrda::data_error);

  REQUIRE_NOTHROW(TransportationInstance(costs, half, half));
}

TEST_CASE("transport: lp_subproblem returns the best feasible vertex") {
  corrda::Rng rng(47);
  Eigen::MatrixXd gradient(7, 5);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 5; ++j) gradient(i, j) = rng.normal();
  const auto vertex = corrda::lp_subproblem(gradient);
  REQUIRE(vertex.values.rows() == 7);
  REQUIRE(vertex.values.cols() == 5);
  REQUIRE(corrda::feasibility_violation(vertex) < 1e-12);
  const double at_vertex = (gradient.cwiseProduct(vertex.values)).sum();
  for (int rep = 0; rep < 40; ++rep) {
    const Eigen::MatrixXd other = oracles::random_feasible(rng, 7, 5);
    const double at_other = (gradient.cwiseProduct(other)).sum();
    REQUIRE(at_vertex <= at_other + 1e-9);
  }
}

TEST_CASE("transport: moderate instances agree between simplex and reference") {
  corrda::Rng rng(48);
  const Eigen::MatrixXd costs = random_costs(rng, 60, 45, -2.0, 2.0);
  const auto inst = TransportationInstance::uniform_marginals(costs);
  const auto a = corrda::solve_network_simplex(inst);
  const auto b = corrda::solve_reference(inst);
  REQUIRE(a.objective == Catch::Approx(b.objective).margin(1e-9 * (1.0 + std::abs(a.objective))));
  check_marginals(inst, a);
}
