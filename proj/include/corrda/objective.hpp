#pragma once

#include <Eigen/Dense>
#include <vector>

#include "corrda/affinity.hpp"
#include "corrda/dataset.hpp"

namespace corrda {

// Relaxed correspondence between source and target samples: rows sum to 1,
// columns sum to n_s/n_t, entries nonnegative (a scaled transportation
// polytope; permutation matrices appear as vertices when n_s = n_t).
struct CorrespondenceMatrix {
  Eigen::MatrixXd values;  // n_s x n_t

  int source_n() const { return static_cast<int>(values.rows()); }
  int target_n() const { return static_cast<int>(values.cols()); }
};

// Largest violation of the correspondence constraints; 0 for an exactly
// feasible matrix. Used with 1e-6 for type-level checks and 1e-9 for
// solver-produced iterates.
inline double feasibility_violation(const CorrespondenceMatrix& c) {
  const double ns = static_cast<double>(c.source_n());
  const double nt = static_cast<double>(c.target_n());
  double v = std::max(0.0, -c.values.minCoeff());
  v = std::max(v, (c.values.rowwise().sum().array() - 1.0).abs().maxCoeff());
  v = std::max(v, (c.values.colwise().sum().array() - ns / nt).abs().maxCoeff());
  return v;
}

// Everything fixed during one solve: both domains, their affinity matrices,
// the regularization weights, and the class index sets driving the group
// penalty. Immutable after construction; safe to share across threads.
struct ObjectiveContext {
  Eigen::MatrixXd source_x;  // n_s x d
  Eigen::MatrixXd target_x;  // n_t x d
  Eigen::MatrixXd ds;        // n_s x n_s
  Eigen::MatrixXd dt;        // n_t x n_t
  std::vector<std::vector<int>> class_index_sets;
  double lambda_s = 0.0;
  double lambda_g = 0.0;
  double ratio_r = 1.0;  // n_t / n_s

  int source_n() const { return static_cast<int>(source_x.rows()); }
  int target_n() const { return static_cast<int>(target_x.rows()); }
  int dim() const { return static_cast<int>(source_x.cols()); }
};

inline ObjectiveContext make_objective_context(const SampleSet& source,
                                               const SampleSet& target,
                                               const AffinityMatrix& ds,
                                               const AffinityMatrix& dt, double lambda_s,
                                               double lambda_g) {
  if (!source.labelled()) throw data_error("objective needs labelled source samples");
  if (source.dim() != target.dim())
    throw data_error("source and target feature dimensions differ");
  if (ds.values.rows() != source.size() || dt.values.rows() != target.size())
    throw data_error("affinity matrix shape does not match its sample set");
  if (lambda_s < 0.0 || lambda_g < 0.0) throw data_error("lambdas must be >= 0");
  ObjectiveContext ctx;
  ctx.source_x = source.features;
  ctx.target_x = target.features;
  ctx.ds = ds.values;
  ctx.dt = dt.values;
  ctx.class_index_sets = class_rows(source);
  ctx.lambda_s = lambda_s;
  ctx.lambda_g = lambda_g;
  ctx.ratio_r = static_cast<double>(target.size()) / static_cast<double>(source.size());
  return ctx;
}

struct ObjectiveValue {
  double total = 0.0;
  double f1 = 0.0;  // ||C Xt - Xs||_F^2            (raw, unnormalized)
  double f2 = 0.0;  // ||C Dt - r Ds C||_F^2
  double f3 = 0.0;  // sum_j sum_c ||C[I_c, j]||_2
};

namespace detail {

inline void check_shapes(const ObjectiveContext& ctx, const CorrespondenceMatrix& c) {
  if (c.source_n() != ctx.source_n() || c.target_n() != ctx.target_n())
    throw data_error("correspondence matrix shape does not match the context");
}

// Group norms: one value per (class, target column).
inline Eigen::MatrixXd group_norms(const ObjectiveContext& ctx, const Eigen::MatrixXd& c) {
  const int classes = static_cast<int>(ctx.class_index_sets.size());
  Eigen::MatrixXd norms(classes, c.cols());
  for (int g = 0; g < classes; ++g) {
    const auto& rows = ctx.class_index_sets[g];
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      double ss = 0.0;
      for (int i : rows) ss += c(i, j) * c(i, j);
      norms(g, j) = std::sqrt(ss);
    }
  }
  return norms;
}

}  // namespace detail

// f(C) = f1/(n_s d) + lambda_s f2 + lambda_g f3. Any real matrix of the
// right shape is accepted; feasibility is the caller's concern.
// Terms with a zero weight are skipped entirely; their fields report 0.
inline ObjectiveValue eval_f(const ObjectiveContext& ctx, const CorrespondenceMatrix& c) {
  detail::check_shapes(ctx, c);
  ObjectiveValue v;
  const Eigen::MatrixXd residual = c.values * ctx.target_x - ctx.source_x;
  v.f1 = residual.squaredNorm();
  if (ctx.lambda_s != 0.0) {
    const Eigen::MatrixXd cdt = c.values * ctx.dt;
    const Eigen::MatrixXd dsc = ctx.ds * c.values;
    v.f2 = (cdt - ctx.ratio_r * dsc).squaredNorm();
  }
  if (ctx.lambda_g != 0.0) v.f3 = detail::group_norms(ctx, c.values).sum();
  v.total = v.f1 / (static_cast<double>(ctx.source_n()) * ctx.dim()) +
            ctx.lambda_s * v.f2 + ctx.lambda_g * v.f3;
  return v;
}

// Subgradient of f. The group term's non-differentiable coordinates (whole
// class block of a column at zero) get 0, the minimum-norm subgradient.
inline Eigen::MatrixXd grad_f(const ObjectiveContext& ctx, const CorrespondenceMatrix& c) {
  detail::check_shapes(ctx, c);
  const double r = ctx.ratio_r;
  const Eigen::MatrixXd residual = c.values * ctx.target_x - ctx.source_x;

  Eigen::MatrixXd grad =
      (2.0 / (static_cast<double>(ctx.source_n()) * ctx.dim())) *
      (residual * ctx.target_x.transpose());
  if (ctx.lambda_s != 0.0) {
    const Eigen::MatrixXd cdt = c.values * ctx.dt;
    const Eigen::MatrixXd dsc = ctx.ds * c.values;
    grad.noalias() += (2.0 * ctx.lambda_s) * (cdt * ctx.dt.transpose());
    grad.noalias() -= (2.0 * ctx.lambda_s * r) * (dsc * ctx.dt.transpose());
    grad.noalias() -= (2.0 * ctx.lambda_s * r) * (ctx.ds.transpose() * cdt);
    grad.noalias() += (2.0 * ctx.lambda_s * r * r) * (ctx.ds.transpose() * dsc);
  }
  if (ctx.lambda_g != 0.0) {
    const Eigen::MatrixXd norms = detail::group_norms(ctx, c.values);
    for (std::size_t g = 0; g < ctx.class_index_sets.size(); ++g) {
      for (Eigen::Index j = 0; j < c.values.cols(); ++j) {
        const double nrm = norms(static_cast<Eigen::Index>(g), j);
        if (nrm == 0.0) continue;
        const double scale = ctx.lambda_g / nrm;
        for (int i : ctx.class_index_sets[g]) grad(i, j) += scale * c.values(i, j);
      }
    }
  }
  return grad;
}

// One-pass value + subgradient; the conditional-gradient loop needs both per
// iteration and the three shared products dominate the cost.
inline std::pair<ObjectiveValue, Eigen::MatrixXd> eval_and_grad(
    const ObjectiveContext& ctx, const CorrespondenceMatrix& c) {
  detail::check_shapes(ctx, c);
  const double r = ctx.ratio_r;
  const double f1_scale = static_cast<double>(ctx.source_n()) * ctx.dim();
  ObjectiveValue v;
  const Eigen::MatrixXd residual = c.values * ctx.target_x - ctx.source_x;
  v.f1 = residual.squaredNorm();

  Eigen::MatrixXd grad = (2.0 / f1_scale) * (residual * ctx.target_x.transpose());
  if (ctx.lambda_s != 0.0) {
    const Eigen::MatrixXd cdt = c.values * ctx.dt;
    const Eigen::MatrixXd dsc = ctx.ds * c.values;
    v.f2 = (cdt - r * dsc).squaredNorm();
    grad.noalias() += (2.0 * ctx.lambda_s) * (cdt * ctx.dt.transpose());
    grad.noalias() -= (2.0 * ctx.lambda_s * r) * (dsc * ctx.dt.transpose());
    grad.noalias() -= (2.0 * ctx.lambda_s * r) * (ctx.ds.transpose() * cdt);
    grad.noalias() += (2.0 * ctx.lambda_s * r * r) * (ctx.ds.transpose() * dsc);
  }
  if (ctx.lambda_g != 0.0) {
    const Eigen::MatrixXd norms = detail::group_norms(ctx, c.values);
    v.f3 = norms.sum();
    for (std::size_t g = 0; g < ctx.class_index_sets.size(); ++g) {
      for (Eigen::Index j = 0; j < c.values.cols(); ++j) {
        const double nrm = norms(static_cast<Eigen::Index>(g), j);
        if (nrm == 0.0) continue;
        const double scale = ctx.lambda_g / nrm;
        for (int i : ctx.class_index_sets[g]) grad(i, j) += scale * c.values(i, j);
      }
    }
  }
  v.total = v.f1 / f1_scale + ctx.lambda_s * v.f2 + ctx.lambda_g * v.f3;
  return {v, std::move(grad)};
}

}  // namespace corrda
