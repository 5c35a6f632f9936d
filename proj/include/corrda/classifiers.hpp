#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "corrda/affinity.hpp"
#include "corrda/dataset.hpp"

namespace corrda {

// Nearest-neighbour labels under Euclidean distance. Distance ties go to the
// lowest training index, so predictions are order-deterministic.
inline std::vector<int> knn_predict(const SampleSet& train, const Eigen::MatrixXd& test_x) {
  if (!train.labelled()) throw data_error("1-NN needs labelled training samples");
  if (test_x.cols() != train.features.cols())
    throw data_error("test feature dimension does not match training set");
  const Eigen::MatrixXd d2 = detail::squared_distances(test_x, train.features);
  std::vector<int> out(static_cast<std::size_t>(test_x.rows()));
  for (Eigen::Index i = 0; i < d2.rows(); ++i) {
    int best = 0;
    for (Eigen::Index j = 1; j < d2.cols(); ++j)
      if (d2(i, j) < d2(i, best)) best = static_cast<int>(j);
    out[static_cast<std::size_t>(i)] = train.labels[static_cast<std::size_t>(best)];
  }
  return out;
}

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size() || truth.empty())
    throw data_error("prediction and truth label counts differ");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (predicted[i] == truth[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

struct SvmParams {
  double c = 1.0;
  double gamma = 1.0;
};

// Binary RBF-kernel SVM. Classes {0,1} are trained as y = -1/+1; a decision
// value > 0 predicts class 1.
struct SvmModel {
  Eigen::MatrixXd support_x;
  Eigen::VectorXd coef;  // alpha_q * y_q per support vector
  double bias = 0.0;
  double gamma = 1.0;

  Eigen::VectorXd decision_values(const Eigen::MatrixXd& x) const {
    if (x.cols() != support_x.cols())
      throw data_error("test feature dimension does not match the model");
    const Eigen::MatrixXd k =
        (-gamma * detail::squared_distances(x, support_x)).array().exp();
    return (k * coef).array() + bias;
  }

  std::vector<int> predict(const Eigen::MatrixXd& x) const {
    const Eigen::VectorXd f = decision_values(x);
    std::vector<int> out(static_cast<std::size_t>(f.size()));
    for (Eigen::Index i = 0; i < f.size(); ++i) out[static_cast<std::size_t>(i)] = f(i) > 0.0 ? 1 : 0;
    return out;
  }
};

// Dual SMO solver with maximal-violating-pair working-set selection. Runs on
// a precomputed kernel matrix until the KKT violation m - M falls under tol
// (or an iteration cap; the returned model is still usable then). Index ties
// in the pair selection go to the lowest index for determinism.
inline SvmModel train_svm(const SampleSet& train, const SvmParams& params,
                          double tol = 1e-3, long long max_iters = 100000) {
  validate(train);
  if (train.class_count != 2) throw data_error("SVM training needs exactly 2 classes");
  if (!(params.c > 0.0) || !(params.gamma > 0.0))
    throw data_error("SVM C and gamma must be > 0");
  const int n = train.size();
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = train.labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
  const Eigen::MatrixXd k =
      (-params.gamma * detail::squared_distances(train.features, train.features))
          .array()
          .exp();

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = Eigen::VectorXd::Constant(n, -1.0);  // gradient of the dual
  const double cbox = params.c;
  double m_up = 0.0, m_low = 0.0;
  for (long long it = 0;; ++it) {
    // i maximizes -y g over indices whose alpha can grow along +y;
    // j minimizes it over those that can shrink.
    int i = -1, j = -1;
    m_up = -std::numeric_limits<double>::infinity();
    m_low = std::numeric_limits<double>::infinity();
    for (int p = 0; p < n; ++p) {
      const double v = -y(p) * g(p);
      const bool up = (y(p) > 0.0) ? alpha(p) < cbox : alpha(p) > 0.0;
      const bool low = (y(p) > 0.0) ? alpha(p) > 0.0 : alpha(p) < cbox;
      if (up && v > m_up) {
        m_up = v;
        i = p;
      }
      if (low && v < m_low) {
        m_low = v;
        j = p;
      }
    }
    if (i < 0 || j < 0 || m_up - m_low <= tol || it >= max_iters) break;

    double eta = k(i, i) + k(j, j) - 2.0 * k(i, j);
    if (eta <= 1e-12) eta = 1e-12;
    // Move along alpha_i += y_i t, alpha_j -= y_j t, staying in the box.
    double t = (m_up - m_low) / eta;
    const double hi_i = (y(i) > 0.0) ? cbox - alpha(i) : alpha(i);
    const double hi_j = (y(j) > 0.0) ? alpha(j) : cbox - alpha(j);
    t = std::min(t, std::min(hi_i, hi_j));
    alpha(i) += y(i) * t;
    alpha(j) -= y(j) * t;
    const double snap = 1e-12 * cbox;
    for (int p : {i, j}) {
      if (alpha(p) < snap) alpha(p) = 0.0;
      if (alpha(p) > cbox - snap) alpha(p) = cbox;
    }
    g += t * (y.array() * (k.col(i) - k.col(j)).array()).matrix();
  }

  // Bias from free support vectors when any exist, else the midpoint rule.
  double bias = 0.0;
  int free_count = 0;
  const double margin = 1e-8 * cbox;
  for (int p = 0; p < n; ++p)
    if (alpha(p) > margin && alpha(p) < cbox - margin) {
      bias += -y(p) * g(p);
      ++free_count;
    }
  bias = free_count > 0 ? bias / free_count : 0.5 * (m_up + m_low);
  if (!std::isfinite(bias)) bias = 0.0;

  std::vector<int> sv;
  for (int p = 0; p < n; ++p)
    if (alpha(p) > 0.0) sv.push_back(p);
  SvmModel model;
  model.gamma = params.gamma;
  model.bias = bias;
  model.support_x.resize(static_cast<Eigen::Index>(sv.size()), train.features.cols());
  model.coef.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t r = 0; r < sv.size(); ++r) {
    model.support_x.row(static_cast<Eigen::Index>(r)) = train.features.row(sv[r]);
    model.coef(static_cast<Eigen::Index>(r)) = alpha(sv[r]) * y(sv[r]);
  }
  return model;
}

// Deterministic stratified folds: each class's indices (ascending) are dealt
// round-robin across the k folds.
inline std::vector<std::vector<int>> stratified_folds(const SampleSet& s, int k) {
  if (!s.labelled()) throw data_error("stratified folds need labels");
  if (k < 2) throw data_error("need at least 2 folds");
  std::vector<std::vector<int>> folds(static_cast<std::size_t>(k));
  for (const auto& rows : class_rows(s)) {
    if (static_cast<int>(rows.size()) < 2)
      throw data_error("each class needs at least 2 samples for cross-validation");
    for (std::size_t p = 0; p < rows.size(); ++p)
      folds[p % static_cast<std::size_t>(k)].push_back(rows[p]);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

namespace detail {

inline SampleSet take_rows(const SampleSet& s, const std::vector<int>& rows) {
  SampleSet out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), s.features.cols());
  out.labels.reserve(rows.size());
  out.class_count = s.class_count;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = s.features.row(rows[r]);
    if (s.labelled()) out.labels.push_back(s.labels[static_cast<std::size_t>(rows[r])]);
  }
  return out;
}

}  // namespace detail

struct SvmSelection {
  SvmParams best;
  double cv_accuracy = 0.0;
  SvmModel model;  // retrained on the full set with the winning parameters
};

// Grid search over gamma = 2^{-4..4} / (d * var) and C in {0.1, 1, 10, 100},
// scored by pooled 5-fold stratified cross-validation accuracy. Accuracy ties
// keep the smallest (gamma, C) pair, which the ascending scan order provides.
inline SvmSelection svm_cv_select(const SampleSet& train, int folds = 5,
                                  double tol = 1e-3) {
  validate(train);
  if (train.class_count != 2) throw data_error("SVM training needs exactly 2 classes");
  const double var =
      (train.features.array() - train.features.mean()).square().mean();
  const double gamma_base =
      var > 0.0 ? 1.0 / (static_cast<double>(train.dim()) * var) : 1.0;
  std::vector<double> gammas;
  for (int e = -4; e <= 4; ++e) gammas.push_back(std::ldexp(gamma_base, e));
  const std::vector<double> cs{0.1, 1.0, 10.0, 100.0};

  const auto fold_rows = stratified_folds(train, folds);
  std::vector<std::vector<int>> train_rows(fold_rows.size());
  for (std::size_t f = 0; f < fold_rows.size(); ++f)
    for (std::size_t o = 0; o < fold_rows.size(); ++o)
      if (o != f)
        train_rows[f].insert(train_rows[f].end(), fold_rows[o].begin(), fold_rows[o].end());

  SvmSelection sel;
  double best_score = -1.0;
  for (double gamma : gammas) {
    for (double c : cs) {
      const SvmParams params{c, gamma};
      long long hits = 0, total = 0;
      for (std::size_t f = 0; f < fold_rows.size(); ++f) {
        const SampleSet tr = detail::take_rows(train, train_rows[f]);
        const SampleSet va = detail::take_rows(train, fold_rows[f]);
        const SvmModel model = train_svm(tr, params, tol);
        const std::vector<int> pred = model.predict(va.features);
        for (std::size_t p = 0; p < pred.size(); ++p)
          if (pred[p] == va.labels[p]) ++hits;
        total += static_cast<long long>(pred.size());
      }
      const double score = static_cast<double>(hits) / static_cast<double>(total);
      if (score > best_score) {
        best_score = score;
        sel.best = params;
      }
    }
  }
  sel.cv_accuracy = best_score;
  sel.model = train_svm(train, sel.best, tol);
  return sel;
}

}  // namespace corrda
