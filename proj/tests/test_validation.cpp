#include <catch2/catch_amalgamated.hpp>

#include "corrda/validation.hpp"

using corrda::AdaptationConfig;
using corrda::GridPoint;
using corrda::RvConfig;

namespace {

corrda::MoonsPair small_pair(double degrees, int per_class = 15, std::uint64_t seed = 71) {
  corrda::MoonsSpec spec;
  spec.per_class = per_class;
  spec.rotation_deg = degrees;
  spec.seed = seed;
  return corrda::generate_moons(spec);
}

AdaptationConfig quick_config() {
  AdaptationConfig config;
  config.cg.max_iters = 12;  // scores, not polish
  return config;
}

}  // namespace

TEST_CASE("pick_best: highest score wins, ties take the smallest lambdas") {
  const std::vector<GridPoint> surface{
      {10.0, 10.0, 0.8}, {0.1, 100.0, 0.9}, {1.0, 1.0, 0.9}, {0.1, 1.0, 0.9}, {100.0, 0.1, 0.7}};
  const GridPoint best = corrda::pick_best(surface);
  REQUIRE(best.lambda_s == 0.1);
  REQUIRE(best.lambda_g == 1.0);
  REQUIRE(best.score == 0.9);
  REQUIRE_THROWS_AS(corrda::pick_best({}), corrda::data_error);
}

TEST_CASE("reverse validation: structure and determinism") {
  const auto pair = small_pair(30.0);
  RvConfig rcfg;
  rcfg.folds = 3;
  const auto a = corrda::reverse_validate(pair.source, pair.target, quick_config(), rcfg);
  REQUIRE(a.folds.size() == 3);
  double sum = 0.0;
  int held_total = 0;
  for (const auto& f : a.folds) {
    REQUIRE(f.accuracy >= 0.0);
    REQUIRE(f.accuracy <= 1.0);
    sum += f.accuracy;
    held_total += f.held_out_size;
  }
  REQUIRE(held_total == pair.source.size());
  REQUIRE(a.score == Catch::Approx(sum / 3.0).margin(1e-15));

  const auto b = corrda::reverse_validate(pair.source, pair.target, quick_config(), rcfg);
  for (std::size_t f = 0; f < a.folds.size(); ++f)
    REQUIRE(a.folds[f].accuracy == b.folds[f].accuracy);
}

TEST_CASE("reverse validation: worker count does not change the result") {
  const auto pair = small_pair(45.0);
  RvConfig serial;
  serial.folds = 4;
  serial.jobs = 1;
  RvConfig parallel = serial;
  parallel.jobs = 4;
  const auto a = corrda::reverse_validate(pair.source, pair.target, quick_config(), serial);
  const auto b = corrda::reverse_validate(pair.source, pair.target, quick_config(), parallel);
  REQUIRE(a.score == b.score);
  for (std::size_t f = 0; f < a.folds.size(); ++f)
    REQUIRE(a.folds[f].accuracy == b.folds[f].accuracy);
}

TEST_CASE("reverse validation: target labels are never consulted") {
  const auto pair = small_pair(25.0);
  corrda::SampleSet stripped = pair.target;
  stripped.labels.clear();
  stripped.class_count = 0;
  RvConfig rcfg;
  rcfg.folds = 3;
  const auto with_labels =
      corrda::reverse_validate(pair.source, pair.target, quick_config(), rcfg);
  const auto without_labels =
      corrda::reverse_validate(pair.source, stripped, quick_config(), rcfg);
  REQUIRE(with_labels.score == without_labels.score);
}

TEST_CASE("reverse validation: self-adaptation scores high") {
  const auto pair = small_pair(0.0, 20);
  AdaptationConfig config;
  config.cg.max_iters = 30;
  RvConfig rcfg;
  rcfg.folds = 4;
  const auto report = corrda::reverse_validate(pair.source, pair.source, config, rcfg);
  REQUIRE(report.score >= 0.85);
}

TEST_CASE("reverse validation: argument checks") {
  const auto pair = small_pair(10.0, 6);
  RvConfig rcfg;
  rcfg.folds = 1;
  REQUIRE_THROWS_AS(corrda::reverse_validate(pair.source, pair.target, quick_config(), rcfg),
                    corrda::data_error);
  corrda::SampleSet unlabelled = pair.source;
  unlabelled.labels.clear();
  unlabelled.class_count = 0;
  REQUIRE_THROWS_AS(corrda::reverse_validate(unlabelled, pair.target, quick_config(), {}),
                    corrda::data_error);
}

TEST_CASE("grid search: surface layout, best pick, and worker invariance") {
  const auto pair = small_pair(35.0, 12);
  corrda::GridSpec grid;
  grid.lambda_s = {0.1, 1.0};
  grid.lambda_g = {0.0, 0.5};
  RvConfig rcfg;
  rcfg.folds = 3;
  const auto serial = corrda::grid_search(pair.source, pair.target, grid, quick_config(), rcfg);
  REQUIRE(serial.surface.size() == 4);
  // lambda_s-major, lambda_g-minor ordering
  REQUIRE(serial.surface[0].lambda_s == 0.1);
  REQUIRE(serial.surface[0].lambda_g == 0.0);
  REQUIRE(serial.surface[1].lambda_s == 0.1);
  REQUIRE(serial.surface[1].lambda_g == 0.5);
  REQUIRE(serial.surface[2].lambda_s == 1.0);
  const GridPoint expect = corrda::pick_best(serial.surface);
  REQUIRE(serial.best.lambda_s == expect.lambda_s);
  REQUIRE(serial.best.lambda_g == expect.lambda_g);
  REQUIRE(serial.best.score == expect.score);

  RvConfig threaded = rcfg;
  threaded.jobs = 3;
  const auto parallel =
      corrda::grid_search(pair.source, pair.target, grid, quick_config(), threaded);
  for (std::size_t i = 0; i < serial.surface.size(); ++i)
    REQUIRE(serial.surface[i].score == parallel.surface[i].score);
}
