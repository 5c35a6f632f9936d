// Command-line front-end: dataset generation, adaptation, evaluation,
// hyperparameter tuning, and two desk-scale benchmarks. Every run writes its
// outputs plus a manifest.json echoing the full configuration; the manifest
// is written last, so its presence marks a completed run.
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "corrda/corrda.hpp"

namespace {

using corrda::data_error;
using corrda::solver_error;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

std::string default_out_dir() {
  if (const char* env = std::getenv("CORRDA_OUT_DIR")) return env;
  return ".";
}

// Collects output paths and per-stage wall-clock times for one command run
// and writes manifest.json as the final act.
struct RunRecorder {
  std::filesystem::path dir;
  json manifest;
  json stages = json::object();
  std::vector<std::string> outputs;
  Clock::time_point mark = Clock::now();

  RunRecorder(std::string command, const std::string& out_dir) : dir(out_dir) {
    std::filesystem::create_directories(dir);
    manifest["command"] = std::move(command);
    manifest["version"] = corrda::version_string;
  }

  void lap(const std::string& stage) {
    const auto now = Clock::now();
    stages[stage] = ms_between(mark, now);
    mark = now;
  }

  std::filesystem::path path(const std::string& name) {
    auto p = dir / name;
    outputs.push_back(p.string());
    return p;
  }

  void finish() {
    manifest["stages_ms"] = stages;
    manifest["outputs"] = outputs;
    const auto mpath = dir / "manifest.json";
    std::ofstream out(mpath, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + mpath.string());
    out << manifest.dump(2) << '\n';
    if (!out) throw data_error("write failed: " + mpath.string());
    std::cout << "manifest: " << mpath.string() << '\n';
  }
};

std::ofstream open_csv(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw data_error("cannot write file: " + p.string());
  return out;
}

std::string fmt(double v) { return corrda::detail::format_double(v); }

// ---------------------------------------------------------------------------
// Shared solver flag bundle (adapt / bench-toy / bench-flow / tune).

struct SolveFlags {
  double lambda_s = 1e-3;
  double lambda_g = 1e-3;
  int nt_rounds = 1;
  double ridge = 1e-3;
  double gap_tol = 1e-5;
  int max_iters = 500;
  std::optional<double> sigma_s;
  std::optional<double> sigma_t;
  std::uint64_t seed = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--lambda-s", lambda_s, "Second-order similarity weight")
        ->capture_default_str();
    cmd->add_option("--lambda-g", lambda_g, "Class-group regularizer weight")
        ->capture_default_str();
    cmd->add_option("--nt", nt_rounds, "Number of adaptation rounds")->capture_default_str();
    cmd->add_option("--ridge", ridge, "Ridge strength of the mapping regression")
        ->capture_default_str();
    cmd->add_option("--gap-tol", gap_tol, "Duality-gap stopping tolerance")
        ->capture_default_str();
    cmd->add_option("--max-iters", max_iters, "Conditional-gradient iteration budget")
        ->capture_default_str();
    cmd->add_option("--sigma-s", sigma_s, "Source kernel width (default: pairwise-mean heuristic)");
    cmd->add_option("--sigma-t", sigma_t, "Target kernel width (default: pairwise-mean heuristic)");
    cmd->add_option("--seed", seed, "Seed echoed through configs and manifests")
        ->capture_default_str();
  }

  corrda::AdaptationConfig to_config() const {
    corrda::AdaptationConfig cfg;
    cfg.lambda_s = lambda_s;
    cfg.lambda_g = lambda_g;
    cfg.rounds = nt_rounds;
    cfg.ridge = ridge;
    cfg.cg.gap_tolerance = gap_tol;
    cfg.cg.max_iters = max_iters;
    cfg.cg.record_trace = true;
    cfg.sigma_source = sigma_s;
    cfg.sigma_target = sigma_t;
    cfg.seed = seed;
    return cfg;
  }

  json echo() const {
    json j;
    j["lambda_s"] = lambda_s;
    j["lambda_g"] = lambda_g;
    j["nt"] = nt_rounds;
    j["ridge"] = ridge;
    j["gap_tol"] = gap_tol;
    j["max_iters"] = max_iters;
    if (sigma_s) j["sigma_s"] = *sigma_s;
    if (sigma_t) j["sigma_t"] = *sigma_t;
    j["seed"] = seed;
    return j;
  }
};

json round_reports_json(const corrda::AdaptationResult& result) {
  json rounds = json::array();
  for (const auto& r : result.rounds) {
    json jr;
    jr["sigma_source"] = r.sigma_source;
    jr["sigma_target"] = r.sigma_target;
    jr["iterations"] = r.cg.iterations;
    jr["converged"] = r.cg.converged;
    jr["final_gap"] = r.cg.final_gap;
    jr["objective"] = r.cg.objective.total;
    jr["objective_terms"] = {{"first_order", r.cg.objective.f1},
                             {"second_order", r.cg.objective.f2},
                             {"group", r.cg.objective.f3}};
    rounds.push_back(std::move(jr));
  }
  return rounds;
}

void write_trace_csv(const std::filesystem::path& p,
                     const std::vector<corrda::RoundReport>& rounds) {
  auto out = open_csv(p);
  out << "round,iteration,objective,gap,step\n";
  for (std::size_t r = 0; r < rounds.size(); ++r)
    for (const auto& it : rounds[r].cg.trace)
      out << r << ',' << it.iter << ',' << fmt(it.objective) << ',' << fmt(it.gap) << ','
          << fmt(it.step) << '\n';
  if (!out) throw data_error("write failed: " + p.string());
}

// Benchmark classifier protocol. The SVM sees each sample set z-scored by its
// own per-column statistics: the mapped source is scale-compressed whenever
// the coupling is diffuse, and a kernel bandwidth cross-validated at that
// compressed scale is blind at the test scale. Per-domain standardization
// removes the scale artifact without touching the geometry. 1-NN ranks by
// relative distance and needs no such correction.
double classifier_accuracy(const corrda::SampleSet& train, const corrda::SampleSet& test,
                           const std::string& clf, int folds) {
  if (clf == "1nn")
    return corrda::accuracy(corrda::knn_predict(train, test.features), test.labels);
  const auto sel = corrda::svm_cv_select(corrda::zscore_normalize(train), folds);
  const auto ztest = corrda::zscore_normalize(test);
  return corrda::accuracy(sel.model.predict(ztest.features), ztest.labels);
}

// ---------------------------------------------------------------------------
// gen-moons

struct GenMoonsArgs {
  int per_class = 150;
  double angle = 50.0;
  double noise = 0.05;
  int test_per_class = 500;
  std::uint64_t seed = 0;
  std::string out = default_out_dir();
};

void run_gen_moons(const GenMoonsArgs& a) {
  RunRecorder rec("gen-moons", a.out);
  corrda::MoonsSpec spec;
  spec.per_class = a.per_class;
  spec.rotation_deg = a.angle;
  spec.noise_std = a.noise;
  spec.seed = a.seed;
  const auto pair = corrda::generate_moons(spec);
  // Held-out draw from the target distribution, salted so it is independent
  // of the train draw (the generator itself salts with 1 and 2).
  corrda::MoonsSpec test_spec = spec;
  test_spec.per_class = a.test_per_class;
  test_spec.seed = corrda::derive_seed(a.seed, 3);
  const auto test_target = corrda::generate_moons(test_spec).target;
  rec.lap("generate");

  corrda::save_csv(rec.path("source.csv"), pair.source);
  corrda::save_csv(rec.path("target.csv"), pair.target);
  corrda::save_csv(rec.path("target_test.csv"), test_target);
  rec.lap("write");

  rec.manifest["config"] = {{"per_class", a.per_class},   {"angle", a.angle},
                            {"noise", a.noise},           {"test_per_class", a.test_per_class},
                            {"seed", a.seed}};
  rec.finish();
}

// ---------------------------------------------------------------------------
// adapt

struct AdaptArgs {
  std::string source_path;
  std::string target_path;
  std::string out = default_out_dir();
  bool emit_correspondence = false;
  bool zscore = false;
  SolveFlags solve;
};

void run_adapt(const AdaptArgs& a) {
  RunRecorder rec("adapt", a.out);
  auto source = corrda::load_csv(a.source_path);
  auto target = corrda::load_csv(a.target_path);
  if (a.zscore) {
    source = corrda::zscore_normalize(source);
    target = corrda::zscore_normalize(target);
  }
  rec.lap("load");

  const auto result = corrda::adapt(source, target, a.solve.to_config());
  rec.lap("adapt");

  corrda::save_csv(rec.path("adapted_source.csv"), result.adapted_source);
  if (a.emit_correspondence)
    corrda::save_matrix_csv(rec.path("correspondence.csv"), result.final_correspondence.values);
  write_trace_csv(rec.path("cg_trace.csv"), result.rounds);
  rec.lap("write");

  json config = a.solve.echo();
  config["source"] = a.source_path;
  config["target"] = a.target_path;
  config["zscore"] = a.zscore;
  config["emit_correspondence"] = a.emit_correspondence;
  rec.manifest["config"] = config;
  rec.manifest["rounds"] = round_reports_json(result);
  rec.manifest["converged"] = result.converged;
  rec.finish();
  if (!result.converged)
    std::cout << "note: iteration budget exhausted before the gap tolerance; "
                 "see manifest rounds for final gaps\n";
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string train_path;
  std::string test_path;
  std::string clf = "1nn";
  int folds = 5;
  std::string out = default_out_dir();
};

void run_eval(const EvalArgs& a) {
  RunRecorder rec("eval", a.out);
  const auto train = corrda::load_csv(a.train_path);
  const auto test = corrda::load_csv(a.test_path);
  if (!train.labelled()) throw data_error("eval needs a labelled training CSV");
  if (!test.labelled()) throw data_error("eval needs a labelled test CSV");
  rec.lap("load");

  std::vector<int> pred;
  if (a.clf == "1nn") {
    pred = corrda::knn_predict(train, test.features);
  } else {
    const auto sel = corrda::svm_cv_select(train, a.folds);
    pred = sel.model.predict(test.features);
    rec.manifest["svm_selection"] = {{"c", sel.best.c},
                                     {"gamma", sel.best.gamma},
                                     {"cv_accuracy", sel.cv_accuracy}};
  }
  rec.lap("classify");

  const double acc = corrda::accuracy(pred, test.labels);
  std::vector<double> hits(static_cast<std::size_t>(test.class_count), 0.0);
  std::vector<double> counts(static_cast<std::size_t>(test.class_count), 0.0);
  for (std::size_t i = 0; i < test.labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(test.labels[i]);
    counts[c] += 1.0;
    if (pred[i] == test.labels[i]) hits[c] += 1.0;
  }

  auto csv = open_csv(rec.path("metrics.csv"));
  csv << "accuracy";
  for (int c = 0; c < test.class_count; ++c) csv << ",class" << c << "_accuracy";
  csv << '\n' << fmt(acc);
  for (int c = 0; c < test.class_count; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    csv << ',' << fmt(counts[ci] > 0.0 ? hits[ci] / counts[ci] : 0.0);
  }
  csv << '\n';
  if (!csv) throw data_error("write failed: metrics.csv");
  rec.lap("write");

  rec.manifest["config"] = {{"train", a.train_path},
                            {"test", a.test_path},
                            {"clf", a.clf},
                            {"folds", a.folds}};
  rec.manifest["accuracy"] = acc;
  rec.finish();
  std::cout << "accuracy: " << acc << '\n';
}

// ---------------------------------------------------------------------------
// bench-toy

struct BenchToyArgs {
  std::vector<double> angles = {10, 20, 30, 40, 50, 70, 90};
  int per_class = 150;
  int test_per_class = 500;
  int trials = 10;
  std::string clf = "svm";
  int folds = 5;
  double noise = 0.05;
  int jobs = 1;
  std::string out = default_out_dir();
  SolveFlags solve;
};

void run_bench_toy(const BenchToyArgs& a) {
  RunRecorder rec("bench-toy", a.out);
  const int n_angles = static_cast<int>(a.angles.size());
  const int n_tasks = n_angles * a.trials;
  std::vector<double> na_acc(static_cast<std::size_t>(n_tasks), 0.0);
  std::vector<double> ad_acc(static_cast<std::size_t>(n_tasks), 0.0);

  corrda::detail::run_parallel(n_tasks, a.jobs, [&](int task) {
    const int angle_idx = task / a.trials;
    const int trial = task % a.trials;
    corrda::MoonsSpec spec;
    spec.per_class = a.per_class;
    spec.rotation_deg = a.angles[static_cast<std::size_t>(angle_idx)];
    spec.noise_std = a.noise;
    spec.seed = corrda::derive_seed(a.solve.seed, static_cast<std::uint64_t>(2 * task));
    const auto pair = corrda::generate_moons(spec);
    corrda::MoonsSpec test_spec = spec;
    test_spec.per_class = a.test_per_class;
    test_spec.seed = corrda::derive_seed(a.solve.seed, static_cast<std::uint64_t>(2 * task + 1));
    const auto test_target = corrda::generate_moons(test_spec).target;

    const auto result = corrda::adapt(pair.source, pair.target, a.solve.to_config());
    const auto i = static_cast<std::size_t>(task);
    na_acc[i] = classifier_accuracy(pair.source, test_target, a.clf, a.folds);
    ad_acc[i] = classifier_accuracy(result.adapted_source, test_target, a.clf, a.folds);
  });
  rec.lap("trials");

  auto csv = open_csv(rec.path("toy_results.csv"));
  csv << "angle,na_mean,adapted_mean\n";
  json per_angle = json::array();
  for (int ai = 0; ai < n_angles; ++ai) {
    double na = 0.0, ad = 0.0;
    json na_list = json::array(), ad_list = json::array();
    for (int t = 0; t < a.trials; ++t) {
      const auto i = static_cast<std::size_t>(ai * a.trials + t);
      na += na_acc[i];
      ad += ad_acc[i];
      na_list.push_back(na_acc[i]);
      ad_list.push_back(ad_acc[i]);
    }
    na /= a.trials;
    ad /= a.trials;
    csv << fmt(a.angles[static_cast<std::size_t>(ai)]) << ',' << fmt(na) << ',' << fmt(ad) << '\n';
    per_angle.push_back({{"angle", a.angles[static_cast<std::size_t>(ai)]},
                         {"na_mean", na},
                         {"adapted_mean", ad},
                         {"na_trials", na_list},
                         {"adapted_trials", ad_list}});
    std::cout << "angle " << a.angles[static_cast<std::size_t>(ai)] << ": no-adaptation " << na
              << ", adapted " << ad << '\n';
  }
  if (!csv) throw data_error("write failed: toy_results.csv");
  rec.lap("write");

  json config = a.solve.echo();
  config["angles"] = a.angles;
  config["per_class"] = a.per_class;
  config["test_per_class"] = a.test_per_class;
  config["trials"] = a.trials;
  config["clf"] = a.clf;
  config["folds"] = a.folds;
  config["noise"] = a.noise;
  config["jobs"] = a.jobs;
  rec.manifest["config"] = config;
  rec.manifest["per_angle"] = per_angle;
  rec.finish();
}

// ---------------------------------------------------------------------------
// bench-flow

struct BenchFlowArgs {
  std::vector<int> sizes = {25, 50, 100, 200};
  double angle = 50.0;
  double noise = 0.05;
  std::string out = default_out_dir();
  SolveFlags solve;  // max_iters below is overridden by --max-iters if given
};

struct FlowTiming {
  double ns_seconds = 0.0;
  double dense_seconds = 0.0;
  double max_obj_diff = 0.0;
  int lp_count = 0;
};

// Times every transportation subproblem of one conditional-gradient run under
// both solvers: the initial cross-cost program plus each gradient program.
// The iterate sequence is driven by the network-simplex solutions.
FlowTiming time_lp_path(const corrda::SampleSet& source, const corrda::SampleSet& target,
                        double lambda_s, double lambda_g, int iters) {
  FlowTiming timing;
  const auto ds = corrda::build_affinity(source.features);
  const auto dt = corrda::build_affinity(target.features);
  const auto ctx = corrda::make_objective_context(source, target, ds, dt, lambda_s, lambda_g);
  const double scale = static_cast<double>(source.size());

  auto solve_both = [&](const Eigen::MatrixXd& costs) {
    const auto inst = corrda::TransportationInstance::uniform_marginals(costs);
    const auto t0 = Clock::now();
    const auto fast = corrda::solve_network_simplex(inst);
    const auto t1 = Clock::now();
    const auto slow = corrda::solve_dense_baseline(inst);
    const auto t2 = Clock::now();
    timing.ns_seconds += seconds_between(t0, t1);
    timing.dense_seconds += seconds_between(t1, t2);
    timing.max_obj_diff =
        std::max(timing.max_obj_diff, std::abs(fast.objective - slow.objective));
    ++timing.lp_count;
    return corrda::CorrespondenceMatrix{fast.flow * scale};
  };

  auto c = solve_both(corrda::build_cross_cost(source.features, target.features).values);
  for (int step = 0; step < iters; ++step) {
    const auto [value, grad] = corrda::eval_and_grad(ctx, c);
    const auto cd = solve_both(grad);
    const double alpha = 2.0 / (static_cast<double>(step) + 3.0);
    c.values = (1.0 - alpha) * c.values + alpha * cd.values;
  }
  return timing;
}

void run_bench_flow(const BenchFlowArgs& a) {
  RunRecorder rec("bench-flow", a.out);
  auto csv = open_csv(rec.path("flow_timings.csv"));
  csv << "n,baseline_s,netsimplex_s,speedup\n";
  json per_size = json::array();
  for (const int n : a.sizes) {
    corrda::MoonsSpec spec;
    spec.per_class = n;
    spec.rotation_deg = a.angle;
    spec.noise_std = a.noise;
    spec.seed = corrda::derive_seed(a.solve.seed, static_cast<std::uint64_t>(n));
    const auto pair = corrda::generate_moons(spec);
    const auto t = time_lp_path(pair.source, pair.target, a.solve.lambda_s, a.solve.lambda_g,
                                a.solve.max_iters);
    const double speedup = t.dense_seconds / t.ns_seconds;
    csv << n << ',' << fmt(t.dense_seconds) << ',' << fmt(t.ns_seconds) << ',' << fmt(speedup)
        << '\n';
    csv.flush();
    per_size.push_back({{"n", n},
                        {"baseline_s", t.dense_seconds},
                        {"netsimplex_s", t.ns_seconds},
                        {"speedup", speedup},
                        {"lp_count", t.lp_count},
                        {"max_objective_diff", t.max_obj_diff}});
    std::cout << "n=" << n << "/class: baseline " << t.dense_seconds << " s, network simplex "
              << t.ns_seconds << " s (" << speedup << "x, " << t.lp_count << " programs)\n";
  }
  if (!csv) throw data_error("write failed: flow_timings.csv");
  rec.lap("bench");

  json config = a.solve.echo();
  config["sizes"] = a.sizes;
  config["angle"] = a.angle;
  config["noise"] = a.noise;
  rec.manifest["config"] = config;
  rec.manifest["per_size"] = per_size;
  rec.finish();
}

// ---------------------------------------------------------------------------
// tune

struct TuneArgs {
  std::string source_path;
  std::string target_path;
  std::vector<double> grid;  // empty -> default grid on both axes
  int folds = 5;
  int jobs = 1;
  bool map_held_out = true;
  bool zscore = false;
  std::string out = default_out_dir();
  SolveFlags solve;
};

void run_tune(const TuneArgs& a) {
  RunRecorder rec("tune", a.out);
  auto source = corrda::load_csv(a.source_path);
  auto target = corrda::load_csv(a.target_path);
  if (a.zscore) {
    source = corrda::zscore_normalize(source);
    target = corrda::zscore_normalize(target);
  }
  rec.lap("load");

  corrda::GridSpec grid;
  if (!a.grid.empty()) {
    grid.lambda_s = a.grid;
    grid.lambda_g = a.grid;
  }
  corrda::RvConfig rcfg;
  rcfg.folds = a.folds;
  rcfg.jobs = a.jobs;
  rcfg.map_held_out = a.map_held_out;
  const auto result = corrda::grid_search(source, target, grid, a.solve.to_config(), rcfg);
  rec.lap("grid_search");

  auto csv = open_csv(rec.path("rv_report.csv"));
  csv << "lambda_s,lambda_g,score\n";
  for (const auto& p : result.surface)
    csv << fmt(p.lambda_s) << ',' << fmt(p.lambda_g) << ',' << fmt(p.score) << '\n';
  if (!csv) throw data_error("write failed: rv_report.csv");
  rec.lap("write");

  json config = a.solve.echo();
  config["source"] = a.source_path;
  config["target"] = a.target_path;
  config["grid_lambda_s"] = grid.lambda_s;
  config["grid_lambda_g"] = grid.lambda_g;
  config["folds"] = a.folds;
  config["jobs"] = a.jobs;
  config["map_held_out"] = a.map_held_out;
  config["zscore"] = a.zscore;
  rec.manifest["config"] = config;
  rec.manifest["selected"] = {{"lambda_s", result.best.lambda_s},
                              {"lambda_g", result.best.lambda_g},
                              {"score", result.best.score}};
  rec.finish();
  std::cout << "selected: lambda_s " << result.best.lambda_s << ", lambda_g "
            << result.best.lambda_g << " (reverse-validation score " << result.best.score
            << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(corrda::version_string) +
               " - correspondence-driven domain adaptation"};
  app.require_subcommand(1);

  GenMoonsArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-moons", "Generate a rotated two-moons domain pair");
  gen_cmd->add_option("--per-class", gen.per_class, "Samples per class and domain")
      ->capture_default_str();
  gen_cmd->add_option("--angle", gen.angle, "Target-domain rotation in degrees")
      ->capture_default_str();
  gen_cmd->add_option("--noise", gen.noise, "Gaussian noise level")->capture_default_str();
  gen_cmd->add_option("--test-per-class", gen.test_per_class, "Held-out test samples per class")
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory")->capture_default_str();
  gen_cmd->callback([&gen] { run_gen_moons(gen); });

  AdaptArgs adapt_args;
  auto* adapt_cmd = app.add_subcommand("adapt", "Adapt a source domain onto a target domain");
  adapt_cmd->add_option("--source", adapt_args.source_path, "Labelled source CSV")->required();
  adapt_cmd->add_option("--target", adapt_args.target_path, "Target CSV (labels ignored)")
      ->required();
  adapt_cmd->add_option("--out", adapt_args.out, "Output directory")->capture_default_str();
  adapt_cmd->add_flag("--emit-correspondence", adapt_args.emit_correspondence,
                      "Also write the full correspondence matrix");
  adapt_cmd->add_flag("--zscore", adapt_args.zscore, "Z-score both domains before adapting");
  adapt_args.solve.attach(adapt_cmd);
  adapt_cmd->callback([&adapt_args] { run_adapt(adapt_args); });

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Train a classifier and report test accuracy");
  eval_cmd->add_option("--train", eval_args.train_path, "Labelled training CSV")->required();
  eval_cmd->add_option("--test", eval_args.test_path, "Labelled test CSV")->required();
  eval_cmd->add_option("--clf", eval_args.clf, "Classifier")
      ->check(CLI::IsMember({"1nn", "svm"}))
      ->capture_default_str();
  eval_cmd->add_option("--folds", eval_args.folds, "CV folds for SVM parameter selection")
      ->capture_default_str();
  eval_cmd->add_option("--out", eval_args.out, "Output directory")->capture_default_str();
  eval_cmd->callback([&eval_args] { run_eval(eval_args); });

  BenchToyArgs toy;
  auto* toy_cmd =
      app.add_subcommand("bench-toy", "Accuracy sweep over rotation angles on two moons");
  toy_cmd->add_option("--angles", toy.angles, "Rotation angles to sweep")
      ->delimiter(',')
      ->capture_default_str();
  toy_cmd->add_option("--per-class", toy.per_class, "Samples per class and domain")
      ->capture_default_str();
  toy_cmd->add_option("--test-per-class", toy.test_per_class, "Held-out test samples per class")
      ->capture_default_str();
  toy_cmd->add_option("--trials", toy.trials, "Trials per angle")->capture_default_str();
  toy_cmd->add_option("--clf", toy.clf, "Classifier")
      ->check(CLI::IsMember({"1nn", "svm"}))
      ->capture_default_str();
  toy_cmd->add_option("--folds", toy.folds, "CV folds for SVM parameter selection")
      ->capture_default_str();
  toy_cmd->add_option("--noise", toy.noise, "Gaussian noise level")->capture_default_str();
  toy_cmd->add_option("--jobs", toy.jobs, "Concurrent trials")->capture_default_str();
  toy_cmd->add_option("--out", toy.out, "Output directory")->capture_default_str();
  toy.solve.max_iters = 100;  // accuracy plateaus well before the solver default
  toy.solve.attach(toy_cmd);
  toy_cmd->callback([&toy] { run_bench_toy(toy); });

  BenchFlowArgs flow;
  auto* flow_cmd = app.add_subcommand(
      "bench-flow", "Time transportation subproblems: network simplex vs naive dense LP");
  flow_cmd->add_option("--sizes", flow.sizes, "Samples per class to benchmark")
      ->delimiter(',')
      ->capture_default_str();
  flow_cmd->add_option("--angle", flow.angle, "Rotation angle of the benchmark pair")
      ->capture_default_str();
  flow_cmd->add_option("--noise", flow.noise, "Gaussian noise level")->capture_default_str();
  flow_cmd->add_option("--out", flow.out, "Output directory")->capture_default_str();
  flow.solve.max_iters = 1;  // the dense baseline makes long runs impractical
  flow.solve.attach(flow_cmd);
  flow_cmd->callback([&flow] { run_bench_flow(flow); });

  TuneArgs tune;
  auto* tune_cmd =
      app.add_subcommand("tune", "Reverse-validation grid search over the lambda weights");
  tune_cmd->add_option("--source", tune.source_path, "Labelled source CSV")->required();
  tune_cmd->add_option("--target", tune.target_path, "Target CSV (labels ignored)")->required();
  tune_cmd->add_option("--grid", tune.grid, "Values for both lambda grids")
      ->delimiter(',');
  tune_cmd->add_option("--folds", tune.folds, "Reverse-validation folds")->capture_default_str();
  tune_cmd->add_option("--jobs", tune.jobs, "Concurrent grid points")->capture_default_str();
  tune_cmd->add_flag("--map-held-out,!--raw-held-out", tune.map_held_out,
                     "Send held-out source folds through the learned maps");
  tune_cmd->add_flag("--zscore", tune.zscore, "Z-score both domains before tuning");
  tune_cmd->add_option("--out", tune.out, "Output directory")->capture_default_str();
  tune.solve.attach(tune_cmd);
  tune_cmd->callback([&tune] { run_tune(tune); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const solver_error& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
