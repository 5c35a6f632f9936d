#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "corrda/classifiers.hpp"
#include "corrda/pipeline.hpp"

namespace corrda {
namespace detail {

// Runs fn(0..tasks-1) across up to `jobs` threads. Results must be written to
// per-task slots by the callers; the first exception wins and is rethrown
// after all workers stop.
template <typename Fn>
inline void run_parallel(int tasks, int jobs, Fn&& fn) {
  jobs = std::max(1, std::min(jobs, tasks));
  if (jobs <= 1) {
    for (int t = 0; t < tasks; ++t) fn(t);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(jobs));
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      while (!failed.load(std::memory_order_relaxed)) {
        const int t = next.fetch_add(1, std::memory_order_relaxed);
        if (t >= tasks) return;
        try {
          fn(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
          failed.store(true, std::memory_order_relaxed);
        }
      }
    });
  }
  for (auto& th : workers) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace detail

struct RvConfig {
  int folds = 5;
  bool map_held_out = true;  // send held-out source through the learned maps
  int jobs = 1;
};

struct RvFold {
  double accuracy = 0.0;
  int held_out_size = 0;
  bool converged = true;
};

struct RvReport {
  std::vector<RvFold> folds;
  double score = 0.0;  // mean of fold accuracies
};

// Reverse validation: a label-free score for adaptation quality. Per source
// fold, adapt the remaining source onto the target, pseudo-label the target
// by 1-NN against the adapted source, train the reverse 1-NN on the target
// with those pseudo-labels, and measure it on the held-out source fold
// (mapped into target space unless map_held_out is off). Target labels are
// stripped on entry and never consulted.
inline RvReport reverse_validate(const SampleSet& source, const SampleSet& target,
                                 const AdaptationConfig& acfg, const RvConfig& rcfg = {}) {
  validate(source);
  if (!source.labelled()) throw data_error("reverse validation needs labelled source");
  if (rcfg.folds < 2) throw data_error("need at least 2 folds");
  SampleSet target_unlabelled;
  target_unlabelled.features = target.features;

  const auto fold_rows = stratified_folds(source, rcfg.folds);
  std::vector<std::vector<int>> train_rows(fold_rows.size());
  for (std::size_t f = 0; f < fold_rows.size(); ++f)
    for (std::size_t o = 0; o < fold_rows.size(); ++o)
      if (o != f)
        train_rows[f].insert(train_rows[f].end(), fold_rows[o].begin(), fold_rows[o].end());

  RvReport report;
  report.folds.resize(fold_rows.size());
  detail::run_parallel(static_cast<int>(fold_rows.size()), rcfg.jobs, [&](int f) {
    const SampleSet train = detail::take_rows(source, train_rows[static_cast<std::size_t>(f)]);
    const SampleSet held = detail::take_rows(source, fold_rows[static_cast<std::size_t>(f)]);
    const AdaptationResult adapted = adapt(train, target_unlabelled, acfg);

    SampleSet reverse_train;
    reverse_train.features = target_unlabelled.features;
    reverse_train.labels = knn_predict(adapted.adapted_source, target_unlabelled.features);
    reverse_train.class_count = source.class_count;

    const Eigen::MatrixXd held_x =
        rcfg.map_held_out ? adapted.map_features(held.features) : held.features;
    const std::vector<int> pred = knn_predict(reverse_train, held_x);
    RvFold& slot = report.folds[static_cast<std::size_t>(f)];
    slot.accuracy = accuracy(pred, held.labels);
    slot.held_out_size = held.size();
    slot.converged = adapted.converged;
  });

  double sum = 0.0;
  for (const RvFold& f : report.folds) sum += f.accuracy;
  report.score = sum / static_cast<double>(report.folds.size());
  return report;
}

struct GridSpec {
  std::vector<double> lambda_s{1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  std::vector<double> lambda_g{1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
};

struct GridPoint {
  double lambda_s = 0.0;
  double lambda_g = 0.0;
  double score = 0.0;
};

struct GridResult {
  std::vector<GridPoint> surface;  // lambda_s-major, lambda_g-minor order
  GridPoint best;
};

// Argmax over an evaluated surface; score ties keep the smallest
// (lambda_s, lambda_g) pair.
inline GridPoint pick_best(const std::vector<GridPoint>& surface) {
  if (surface.empty()) throw data_error("empty grid");
  GridPoint best = surface.front();
  for (const GridPoint& p : surface) {
    const bool better =
        p.score > best.score ||
        (p.score == best.score &&
         (p.lambda_s < best.lambda_s ||
          (p.lambda_s == best.lambda_s && p.lambda_g < best.lambda_g)));
    if (better) best = p;
  }
  return best;
}

// Scores every (lambda_s, lambda_g) pair by reverse validation. Grid points
// run in parallel when rcfg.jobs > 1 (folds inside each point stay serial).
inline GridResult grid_search(const SampleSet& source, const SampleSet& target,
                              const GridSpec& grid, const AdaptationConfig& base,
                              const RvConfig& rcfg = {}) {
  if (grid.lambda_s.empty() || grid.lambda_g.empty()) throw data_error("empty grid");
  GridResult result;
  result.surface.resize(grid.lambda_s.size() * grid.lambda_g.size());
  RvConfig fold_cfg = rcfg;
  fold_cfg.jobs = 1;
  detail::run_parallel(static_cast<int>(result.surface.size()), rcfg.jobs, [&](int t) {
    const std::size_t si = static_cast<std::size_t>(t) / grid.lambda_g.size();
    const std::size_t gi = static_cast<std::size_t>(t) % grid.lambda_g.size();
    AdaptationConfig acfg = base;
    acfg.lambda_s = grid.lambda_s[si];
    acfg.lambda_g = grid.lambda_g[gi];
    GridPoint& p = result.surface[static_cast<std::size_t>(t)];
    p.lambda_s = acfg.lambda_s;
    p.lambda_g = acfg.lambda_g;
    p.score = reverse_validate(source, target, acfg, fold_cfg).score;
  });
  result.best = pick_best(result.surface);
  return result;
}

}  // namespace corrda
