#pragma once

#include <Eigen/Dense>

#include "corrda/common.hpp"
#include "corrda/objective.hpp"

namespace corrda {

// Linear feature-space map x -> x * W learned by ridge regression. Applied to
// row-major sample matrices (n x d), so W is d x d.
struct LinearMap {
  Eigen::MatrixXd w;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    if (x.cols() != w.rows()) throw data_error("map dimension does not match samples");
    return x * w;
  }
};

// Fits W = argmin ||Xs W - C Xt||_F^2 + ridge ||W||_F^2 in closed form:
// W = (Xs^T Xs + ridge I)^-1 Xs^T (C Xt). The normal matrix is symmetric
// positive definite for ridge > 0, so a Cholesky solve is enough.
inline LinearMap fit_mapping(const Eigen::MatrixXd& source_x, const CorrespondenceMatrix& c,
                             const Eigen::MatrixXd& target_x, double ridge = 1e-3) {
  if (ridge <= 0.0) throw data_error("ridge must be > 0");
  if (c.values.rows() != source_x.rows() || c.values.cols() != target_x.rows())
    throw data_error("correspondence shape does not match sample sets");
  if (source_x.cols() != target_x.cols())
    throw data_error("source and target feature dimensions differ");
  Eigen::MatrixXd normal = source_x.transpose() * source_x;
  normal.diagonal().array() += ridge;
  const Eigen::MatrixXd rhs = source_x.transpose() * (c.values * target_x);
  Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success)
    throw solver_error("ridge normal equations are not positive definite");
  LinearMap map;
  map.w = llt.solve(rhs);
  return map;
}

}  // namespace corrda
