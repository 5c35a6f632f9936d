#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "corrda/common.hpp"

namespace corrda {

// A feature matrix (one sample per row) with optional integer class labels.
struct SampleSet {
  Eigen::MatrixXd features;  // n x d
  std::vector<int> labels;   // empty when unlabelled
  int class_count = 0;       // 0 when unlabelled

  int size() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
  bool labelled() const { return !labels.empty(); }
};

// Enforces: non-empty finite features; labels (if any) 0-based, contiguous,
// every class occupied. Throws data_error with a specific message.
inline void validate(const SampleSet& s) {
  if (s.features.rows() < 1 || s.features.cols() < 1)
    throw data_error("sample set must have at least one sample and one feature");
  if (!s.features.allFinite())
    throw data_error("sample set contains a non-finite feature value");
  if (s.labels.empty()) return;
  if (static_cast<int>(s.labels.size()) != s.size())
    throw data_error("label count does not match sample count");
  if (s.class_count < 1) throw data_error("labelled sample set needs class_count >= 1");
  std::vector<int> seen(s.class_count, 0);
  for (int y : s.labels) {
    if (y < 0 || y >= s.class_count)
      throw data_error("label " + std::to_string(y) + " outside [0, " +
                       std::to_string(s.class_count) + ")");
    seen[y] = 1;
  }
  for (int c = 0; c < s.class_count; ++c)
    if (!seen[c]) throw data_error("class " + std::to_string(c) + " has no samples");
}

// Indices of each class's rows, in ascending order.
inline std::vector<std::vector<int>> class_rows(const SampleSet& s) {
  std::vector<std::vector<int>> rows(s.class_count);
  for (int i = 0; i < s.size(); ++i) rows[s.labels[i]].push_back(i);
  return rows;
}

struct MoonsSpec {
  int per_class = 150;
  double rotation_deg = 0.0;
  double noise_std = 0.05;
  std::uint64_t seed = 0;
};

struct MoonsPair {
  SampleSet source;
  SampleSet target;
};

namespace detail {

// One moon pair: class 0 on the upper arc (cos t, sin t), class 1 on the
// lower arc (1 - cos t, 0.5 - sin t), t uniform in [0, pi], iid Gaussian
// noise on both coordinates.
inline SampleSet draw_moons(int per_class, double noise_std, Rng& rng) {
  SampleSet s;
  s.features.resize(2 * per_class, 2);
  s.labels.resize(2 * per_class);
  s.class_count = 2;
  for (int i = 0; i < per_class; ++i) {
    const double t = std::numbers::pi * rng.uniform();
    s.features(i, 0) = std::cos(t) + noise_std * rng.normal();
    s.features(i, 1) = std::sin(t) + noise_std * rng.normal();
    s.labels[i] = 0;
  }
  for (int i = 0; i < per_class; ++i) {
    const double t = std::numbers::pi * rng.uniform();
    s.features(per_class + i, 0) = 1.0 - std::cos(t) + noise_std * rng.normal();
    s.features(per_class + i, 1) = 0.5 - std::sin(t) + noise_std * rng.normal();
    s.labels[per_class + i] = 1;
  }
  return s;
}

}  // namespace detail

// Population centroid of the (noise-free) moon pair; rotations are taken
// about this fixed point so every draw of the rotated domain comes from the
// same distribution.
inline constexpr double moons_center_x = 0.5;
inline constexpr double moons_center_y = 0.25;

// Rotate the rows of a 2-column sample set about the moons center, in place.
inline void rotate_about_moons_center(Eigen::MatrixXd& x, double degrees) {
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double px = x(i, 0) - moons_center_x;
    const double py = x(i, 1) - moons_center_y;
    x(i, 0) = c * px - s * py + moons_center_x;
    x(i, 1) = s * px + c * py + moons_center_y;
  }
}

// Source draw plus an independent re-draw rotated by spec.rotation_deg.
// The raw draws depend only on the seed, never on the rotation angle.
inline MoonsPair generate_moons(const MoonsSpec& spec) {
  if (spec.per_class < 1) throw data_error("per_class must be >= 1");
  if (spec.rotation_deg < 0.0 || spec.rotation_deg > 180.0)
    throw data_error("rotation_deg must lie in [0, 180]");
  Rng src_rng(derive_seed(spec.seed, 1));
  Rng tgt_rng(derive_seed(spec.seed, 2));
  MoonsPair out;
  out.source = detail::draw_moons(spec.per_class, spec.noise_std, src_rng);
  out.target = detail::draw_moons(spec.per_class, spec.noise_std, tgt_rng);
  rotate_about_moons_center(out.target.features, spec.rotation_deg);
  return out;
}

// Center each feature column and scale by its population std (divide by n).
// Zero-variance columns pass through unchanged.
inline SampleSet zscore_normalize(const SampleSet& s) {
  if (s.size() < 2) throw data_error("z-score normalization needs at least 2 samples");
  SampleSet out = s;
  const double n = static_cast<double>(s.size());
  for (int j = 0; j < s.dim(); ++j) {
    const double mean = s.features.col(j).mean();
    const double var = (s.features.col(j).array() - mean).square().sum() / n;
    if (var == 0.0) continue;
    out.features.col(j) = (s.features.col(j).array() - mean) / std::sqrt(var);
  }
  return out;
}

// Random partition into (first, second) with |first| ~ fraction * n.
// Stratified per class when labels are present; original sample order is
// preserved inside each part, so the result is deterministic given the seed.
inline std::pair<SampleSet, SampleSet> split(const SampleSet& s, double fraction,
                                             std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw data_error("split fraction must lie strictly between 0 and 1");
  validate(s);
  Rng rng(derive_seed(seed, 3));
  std::vector<char> in_first(s.size(), 0);
  auto mark = [&](std::vector<int>& idx) {
    rng.shuffle(idx);
    const auto take = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(idx.size()) + 0.5));
    for (std::size_t k = 0; k < take && k < idx.size(); ++k) in_first[idx[k]] = 1;
  };
  if (s.labelled()) {
    for (auto& idx : class_rows(s)) {
      if (idx.size() < 2)
        throw data_error("stratified split needs at least 2 samples per class");
      mark(idx);
    }
  } else {
    std::vector<int> idx(s.size());
    for (int i = 0; i < s.size(); ++i) idx[i] = i;
    mark(idx);
  }
  auto gather = [&](char flag) {
    SampleSet part;
    int count = 0;
    for (char f : in_first) count += (f == flag);
    part.features.resize(count, s.dim());
    if (s.labelled()) {
      part.labels.reserve(count);
      part.class_count = s.class_count;
    }
    int r = 0;
    for (int i = 0; i < s.size(); ++i) {
      if (in_first[i] != flag) continue;
      part.features.row(r++) = s.features.row(i);
      if (s.labelled()) part.labels.push_back(s.labels[i]);
    }
    return part;
  };
  return {gather(1), gather(0)};
}

}  // namespace corrda
