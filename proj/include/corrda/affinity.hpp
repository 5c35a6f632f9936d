#pragma once

#include <Eigen/Dense>
#include <optional>

#include "corrda/dataset.hpp"

namespace corrda {

// Gaussian-kernel adjacency of one domain: values[i][j] = exp(-||xi-xj||^2 / sigma^2),
// zero diagonal, symmetric.
struct AffinityMatrix {
  Eigen::MatrixXd values;
  double sigma = 0.0;
};

// Euclidean source-to-target distances; the initialization LP's cost matrix.
struct CrossCostMatrix {
  Eigen::MatrixXd values;  // n_s x n_t
};

namespace detail {

// Squared pairwise distances between rows of a and rows of b, clamped at 0
// (the expansion ||a||^2 - 2ab + ||b||^2 can go epsilon-negative).
inline Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd d2 = -2.0 * a * b.transpose();
  d2.colwise() += a.rowwise().squaredNorm();
  d2.rowwise() += b.rowwise().squaredNorm().transpose();
  return d2.cwiseMax(0.0);
}

}  // namespace detail

// Mean Euclidean distance over unordered pairs i < j (self-pairs excluded).
inline double heuristic_sigma(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw data_error("bandwidth heuristic needs at least 2 samples");
  const Eigen::MatrixXd d2 = detail::squared_distances(x, x);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) total += std::sqrt(d2(i, j));
  const double sigma = total / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
  if (sigma == 0.0)
    throw data_error("all samples identical: bandwidth heuristic degenerates to 0; "
                     "pass sigma explicitly");
  return sigma;
}

inline double heuristic_sigma(const SampleSet& s) { return heuristic_sigma(s.features); }

inline AffinityMatrix build_affinity(const Eigen::MatrixXd& x,
                                     std::optional<double> sigma = std::nullopt) {
  if (x.rows() < 2) throw data_error("affinity matrix needs at least 2 samples");
  if (sigma.has_value() && !(*sigma > 0.0)) throw data_error("sigma must be > 0");
  AffinityMatrix out;
  out.sigma = sigma.has_value() ? *sigma : heuristic_sigma(x);
  out.values = (-detail::squared_distances(x, x) / (out.sigma * out.sigma)).array().exp();
  // Exact symmetry and the zero diagonal are part of the contract; the
  // expansion above is symmetric only to rounding.
  out.values = ((out.values + out.values.transpose()) * 0.5).eval();
  out.values.diagonal().setZero();
  return out;
}

inline AffinityMatrix build_affinity(const SampleSet& s,
                                     std::optional<double> sigma = std::nullopt) {
  return build_affinity(s.features, sigma);
}

inline CrossCostMatrix build_cross_cost(const Eigen::MatrixXd& source_x,
                                        const Eigen::MatrixXd& target_x) {
  if (source_x.cols() != target_x.cols())
    throw data_error("source and target feature dimensions differ");
  return CrossCostMatrix{detail::squared_distances(source_x, target_x).cwiseSqrt()};
}

inline CrossCostMatrix build_cross_cost(const SampleSet& source, const SampleSet& target) {
  return build_cross_cost(source.features, target.features);
}

}  // namespace corrda
