#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "corrda/affinity.hpp"
#include "corrda/objective.hpp"
#include "corrda/transport.hpp"

namespace corrda {

struct CgConfig {
  int max_iters = 500;
  double gap_tolerance = 1e-5;
  bool record_trace = false;
};

// One evaluated iterate: objective pieces, the duality gap measured there,
// and the step size used to move away from it (0 for the final iterate).
struct CgIterate {
  int iter = 0;
  double objective = 0.0;
  double gap = 0.0;
  double step = 0.0;
};

struct CgResult {
  CorrespondenceMatrix c;
  ObjectiveValue objective;
  double final_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<CgIterate> trace;  // empty unless record_trace
};

// Starting point: the optimal transport plan for plain Euclidean cross costs
// between the two feature sets, rescaled so rows sum to one. A feasible
// vertex that already pairs nearby samples, which is a much better warm start
// than the uniform coupling.
inline CorrespondenceMatrix initialize_c0(const Eigen::MatrixXd& source_x,
                                          const Eigen::MatrixXd& target_x) {
  const CrossCostMatrix cost = build_cross_cost(source_x, target_x);
  return lp_subproblem(cost.values);
}

inline CorrespondenceMatrix initialize_c0(const ObjectiveContext& ctx) {
  return initialize_c0(ctx.source_x, ctx.target_x);
}

// Conditional-gradient (Frank-Wolfe) minimization over the transportation
// polytope {C >= 0, C 1 = 1, C^T 1 = (n_s/n_t) 1}. Each iteration solves one
// linear subproblem for the descent vertex C_d and steps with the open-loop
// size 2/(t+2). Terminates when the duality gap <grad, C - C_d> drops to
// gap_tolerance, or after max_iters steps (converged = false in the result;
// callers decide whether a spent budget is an error).
inline CgResult run_cg(const ObjectiveContext& ctx, const CorrespondenceMatrix& c0,
                       const CgConfig& config = {},
                       const std::function<void(const CgIterate&)>& observer = {}) {
  detail::check_shapes(ctx, c0);
  if (feasibility_violation(c0) > 1e-7)
    throw solver_error("initial correspondence is not feasible");
  if (config.max_iters < 0) throw data_error("max_iters must be >= 0");
  if (config.gap_tolerance < 0.0) throw data_error("gap_tolerance must be >= 0");

  CgResult result;
  result.c = c0;
  int steps = 0;
  while (true) {
    auto [value, grad] = eval_and_grad(ctx, result.c);
    const CorrespondenceMatrix cd = lp_subproblem(grad);
    const double gap = (grad.cwiseProduct(result.c.values - cd.values)).sum();

    CgIterate it;
    it.iter = steps;
    it.objective = value.total;
    it.gap = gap;

    result.objective = value;
    result.final_gap = gap;
    result.iterations = steps;
    if (gap <= config.gap_tolerance) {
      result.converged = true;
      if (config.record_trace) result.trace.push_back(it);
      if (observer) observer(it);
      break;
    }
    if (steps >= config.max_iters) {
      if (config.record_trace) result.trace.push_back(it);
      if (observer) observer(it);
      break;
    }

    const double alpha = 2.0 / (static_cast<double>(steps) + 3.0);  // t starts at 1
    it.step = alpha;
    if (config.record_trace) result.trace.push_back(it);
    if (observer) observer(it);

    result.c.values = (1.0 - alpha) * result.c.values + alpha * cd.values;
    ++steps;
  }
  return result;
}

}  // namespace corrda
