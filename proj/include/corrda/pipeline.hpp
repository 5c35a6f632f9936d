#pragma once

#include <optional>
#include <vector>

#include "corrda/affinity.hpp"
#include "corrda/cg.hpp"
#include "corrda/dataset.hpp"
#include "corrda/mapping.hpp"
#include "corrda/objective.hpp"

namespace corrda {

struct AdaptationConfig {
  // Defaults picked by a moons sweep (rotations 10/50/90): small weights keep
  // the structural terms from drowning the normalized alignment term, whose
  // raw scale is orders of magnitude smaller.
  double lambda_s = 1e-3;
  double lambda_g = 1e-3;
  int rounds = 1;
  double ridge = 1e-3;
  CgConfig cg;
  // Kernel widths. When unset, the target width is the pairwise-mean
  // heuristic computed once, and the source width is recomputed each round
  // from the current (already remapped) source features.
  std::optional<double> sigma_source;
  std::optional<double> sigma_target;
  // The solve itself is deterministic; the seed is carried so front-ends can
  // echo one seed through configs, derived draws, and run manifests.
  std::uint64_t seed = 0;
};

struct RoundReport {
  double sigma_source = 0.0;
  double sigma_target = 0.0;
  CgResult cg;
};

struct AdaptationResult {
  SampleSet adapted_source;  // remapped features, original labels
  CorrespondenceMatrix final_correspondence;
  std::vector<LinearMap> maps;  // one per round, in application order
  std::vector<RoundReport> rounds;
  bool converged = true;  // true iff every round's solve hit its gap tolerance

  // Sends new source-domain samples through the learned chain of maps.
  Eigen::MatrixXd map_features(Eigen::MatrixXd x) const {
    for (const LinearMap& m : maps) x = m.apply(x);
    return x;
  }
};

// Full adaptation loop: alternate correspondence solving and map fitting.
// Each round builds the objective on the current source features, minimizes
// it by conditional gradient from the Euclidean-transport start, fits the
// ridge map onto the barycentric targets C Xt, and advances the source.
// Target labels, when present, are ignored.
inline AdaptationResult adapt(const SampleSet& source, const SampleSet& target,
                              const AdaptationConfig& config = {}) {
  validate(source);
  if (!source.labelled()) throw data_error("adaptation needs labelled source samples");
  if (config.rounds < 1) throw data_error("rounds must be >= 1");
  if (config.lambda_s < 0.0 || config.lambda_g < 0.0)
    throw data_error("lambdas must be >= 0");

  SampleSet current = source;
  const AffinityMatrix dt = build_affinity(target.features, config.sigma_target);

  AdaptationResult result;
  SampleSet target_stripped;  // unlabeled view for the objective context
  target_stripped.features = target.features;
  target_stripped.class_count = 0;
  for (int round = 0; round < config.rounds; ++round) {
    const AffinityMatrix ds = build_affinity(current.features, config.sigma_source);
    const ObjectiveContext ctx =
        make_objective_context(current, target_stripped, ds, dt, config.lambda_s,
                               config.lambda_g);
    const CorrespondenceMatrix c0 = initialize_c0(ctx);
    CgResult cg = run_cg(ctx, c0, config.cg);
    const LinearMap map = fit_mapping(current.features, cg.c, target.features, config.ridge);
    current.features = map.apply(current.features);

    result.converged = result.converged && cg.converged;
    result.final_correspondence = cg.c;
    result.maps.push_back(map);
    RoundReport report;
    report.sigma_source = ds.sigma;
    report.sigma_target = dt.sigma;
    report.cg = std::move(cg);
    result.rounds.push_back(std::move(report));
  }
  result.adapted_source = std::move(current);
  return result;
}

}  // namespace corrda
