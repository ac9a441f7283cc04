// roamkit command-line tool: obstacle-avoidance fields, training, rollouts
// and evaluation of learned motion models.

#include "roamkit/errors.hpp"
#include "roamkit/export.hpp"
#include "roamkit/model_io.hpp"
#include "roamkit/scenario.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace roamkit;
using nlohmann::json;

namespace {

constexpr int kExitBadInput = 2;
constexpr int kExitTraining = 3;
constexpr int kExitViolation = 4;

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

struct RolloutArgs {
  double dt = 1e-2;
  int max_steps = 100000;
  std::optional<double> radius;
};

void add_rollout_options(CLI::App* cmd, RolloutArgs& args) {
  cmd->add_option("--dt", args.dt, "Integration step in seconds")->check(CLI::PositiveNumber);
  cmd->add_option("--max-steps", args.max_steps, "Step limit per rollout")->check(CLI::PositiveNumber);
  cmd->add_option("--radius", args.radius,
                  "Convergence radius in data units (default: 5% of the normalization scale)");
}

RolloutOptions rollout_options(const RolloutArgs& args, const LearnedDynamics& dyn) {
  RolloutOptions o;
  o.dt = args.dt;
  o.max_steps = args.max_steps;
  o.convergence_radius = args.radius.value_or(0.05 * dyn.clusters().normalization().scale.norm());
  return o;
}

// Region of influence bounding box in data coordinates.
BoundingBox model_box(const LearnedDynamics& dyn, double margin = 1.0) {
  const ClusterModel& c = dyn.clusters();
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi = -lo;
  const double r = margin * c.influence_radius();
  for (const auto& center : c.centers()) {
    lo = lo.cwiseMin(c.normalization().denormalize(center - Eigen::Vector2d::Constant(r)));
    hi = hi.cwiseMax(c.normalization().denormalize(center + Eigen::Vector2d::Constant(r)));
  }
  return {lo, hi};
}

std::vector<Eigen::Vector2d> read_starts_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,y", 0) != 0) throw InputError("'" + path + "' needs an 'x,y' header");
  std::vector<Eigen::Vector2d> starts;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string x;
    std::string y;
    std::getline(fields, x, ',');
    std::getline(fields, y, ',');
    try {
      std::size_t used_x = 0;
      std::size_t used_y = 0;
      const Eigen::Vector2d p(std::stod(x, &used_x), std::stod(y, &used_y));
      if (used_x != x.size() || used_y != y.size() || !p.allFinite()) throw std::invalid_argument(line);
      starts.push_back(p);
    } catch (const std::exception&) {
      throw InputError("'" + path + "' row " + std::to_string(row) + ": expected two numbers");
    }
  }
  if (starts.empty()) throw InputError("'" + path + "' contains no starts");
  return starts;
}

int cmd_avoid(const std::string& scenario_path, const std::string& engine_name, const std::string& svg_path,
              const std::string& csv_path, int seeds) {
  const Scenario scenario = load_scenario(scenario_path);
  const Engine engine = engine_from_string(engine_name);
  const VectorField field = scenario.field(engine);
  if (!csv_path.empty()) {
    auto out = open_output(csv_path);
    write_grid_csv(out, sample_grid(field, scenario.box, scenario.resolution));
  }
  if (!svg_path.empty()) {
    SvgScene scene;
    scene.box = scenario.box;
    scene.outlines = scenario.outlines();
    StreamlineOptions options;
    options.seeds_per_axis = seeds;
    scene.streamlines = trace_streamlines(field, scenario.box, scenario.attractor, options);
    scene.attractor = scenario.attractor;
    auto out = open_output(svg_path);
    write_svg(out, scene);
  }
  std::cout << "engine " << to_string(engine) << ", " << scenario.obstacles.size() << " obstacle(s)\n";
  return 0;
}

int cmd_train(const std::string& demos_path, int k, std::uint64_t seed, const std::string& config_path,
              const std::string& out_path, const std::string& report_path) {
  if (const char* env = std::getenv("ROAMKIT_SEED")) {
    try {
      std::size_t used = 0;
      seed = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
    } catch (const std::exception&) {
      throw InputError(std::string("ROAMKIT_SEED must be a nonnegative integer, got '") + env + "'");
    }
  }
  const auto demos = read_demonstrations_csv(demos_path);
  const TrainingConfig config = config_path.empty() ? TrainingConfig{} : load_training_config(config_path);
  const TrainingResult result = train(demos, k, seed, config);
  save_model(out_path, result.dynamics, &result.report);
  if (!report_path.empty()) {
    auto out = open_output(report_path);
    out << report_to_json(result.report).dump(2) << "\n";
  }
  const TrainingReport& r = result.report;
  std::cout << "trained k=" << r.k << " seed=" << r.seed << " on " << r.samples
            << " samples, influence radius " << fmt(r.influence_radius) << "\n";
  for (int o = 0; o < r.k; ++o) {
    std::cout << "  cluster " << o << ": " << r.cluster_sizes[static_cast<std::size_t>(o)] << " samples, "
              << fmt(100.0 * r.rejected_fraction[static_cast<std::size_t>(o)]) << "% rejected, parent "
              << r.parent[static_cast<std::size_t>(o)] << "\n";
  }
  return 0;
}

int cmd_rollout(const std::string& model_path, const std::string& starts_path, int grid, const RolloutArgs& args,
                const std::string& out_path, const std::string& svg_path) {
  const LearnedDynamics dyn = load_model(model_path);
  std::vector<Eigen::Vector2d> starts;
  const BoundingBox box = model_box(dyn);
  if (!starts_path.empty()) {
    starts = read_starts_csv(starts_path);
  } else {
    for (const auto& s : sample_grid([](const Vector& x) { return x; }, box, grid)) starts.push_back(s.position);
  }
  const RolloutOptions options = rollout_options(args, dyn);
  const VectorField field = dyn.field();
  auto out = open_output(out_path);
  out << "rollout,step,x,y\n";
  int converged = 0;
  SvgScene scene;
  scene.box = box;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const RolloutResult r = integrate(field, Vector(starts[i]), Vector(dyn.attractor()), options);
    converged += r.converged ? 1 : 0;
    const auto path = planar_path(r);
    for (std::size_t s = 0; s < path.size(); ++s) {
      out << i << ',' << s << ',' << fmt(path[s].x()) << ',' << fmt(path[s].y()) << '\n';
    }
    scene.paths.push_back(path);
  }
  if (!svg_path.empty()) {
    scene.streamlines = trace_streamlines(field, box, dyn.attractor(), StreamlineOptions{20, args.dt, 3000, options.convergence_radius});
    scene.attractor = dyn.attractor();
    auto svg = open_output(svg_path);
    write_svg(svg, scene);
  }
  std::cout << converged << " of " << starts.size() << " rollouts converged\n";
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& demos_path, const RolloutArgs& args,
             const std::string& out_path) {
  const LearnedDynamics dyn = load_model(model_path);
  const auto demos = read_demonstrations_csv(demos_path);
  const RolloutOptions options = rollout_options(args, dyn);
  const VectorField field = dyn.field();
  constexpr int kPoints = 200;

  json per_demo = json::array();
  int converged = 0;
  int violations = 0;
  double ratio_sum = 0.0;
  double squared_sum = 0.0;
  for (const auto& demo : demos) {
    std::vector<Eigen::Vector2d> shown;
    Eigen::Vector2d lo = demo.samples.front().position;
    Eigen::Vector2d hi = lo;
    for (const auto& s : demo.samples) {
      shown.push_back(s.position);
      lo = lo.cwiseMin(s.position);
      hi = hi.cwiseMax(s.position);
    }
    const RolloutResult r = integrate(field, Vector(shown.front()), Vector(dyn.attractor()), options);
    const auto path = planar_path(r);
    const auto a = resample_by_arc_length(shown, kPoints);
    const auto b = resample_by_arc_length(path, kPoints);
    double squared = 0.0;
    for (int i = 0; i < kPoints; ++i) squared += (a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)]).squaredNorm();
    const double rmse = std::sqrt(squared / kPoints);
    const double mean = mean_pointwise_distance(a, b);
    const double diagonal = (hi - lo).norm();
    const int seq = sequence_progress_violations(dyn, path);
    converged += r.converged ? 1 : 0;
    violations += seq;
    ratio_sum += mean / diagonal;
    squared_sum += squared / kPoints;
    per_demo.push_back({{"demo_id", demo.demo_id},
                        {"converged", r.converged},
                        {"steps", r.steps},
                        {"final_distance", r.final_distance_to_attractor},
                        {"rmse", rmse},
                        {"mean_distance", mean},
                        {"bbox_diagonal", diagonal},
                        {"mean_distance_ratio", mean / diagonal},
                        {"sequence_violations", seq},
                        {"error", r.error}});
  }
  const auto n = static_cast<double>(demos.size());
  const json report = {{"demonstrations", per_demo},
                       {"convergence_rate", converged / n},
                       {"rmse", std::sqrt(squared_sum / n)},
                       {"mean_distance_ratio", ratio_sum / n},
                       {"sequence_violations", violations},
                       {"resampled_points", kPoints},
                       {"dt", options.dt},
                       {"convergence_radius", options.convergence_radius}};
  auto out = open_output(out_path);
  out << report.dump(2) << "\n";
  std::cout << converged << " of " << demos.size() << " rollouts converged, rmse " << fmt(report["rmse"].get<double>())
            << ", " << violations << " sequence violation(s)\n";
  if (converged < static_cast<int>(demos.size()) || violations > 0) {
    std::cerr << "property violation: " << (demos.size() - static_cast<std::size_t>(converged))
              << " rollout(s) did not converge, " << violations << " sequence violation(s)\n";
    return kExitViolation;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotational obstacle avoidance and learned motion from demonstrations"};
  app.require_subcommand(1);

  std::string scenario_path, engine = "roam", svg_path, csv_path;
  int seeds = 16;
  auto* avoid = app.add_subcommand("avoid", "Render an obstacle-avoidance field");
  avoid->add_option("scenario", scenario_path, "Scenario JSON")->required();
  avoid->add_option("--engine", engine, "modulation or roam")->check(CLI::IsMember({"modulation", "roam"}));
  avoid->add_option("--out", svg_path, "SVG output");
  avoid->add_option("--csv", csv_path, "Grid CSV output (x,y,vx,vy,mask)");
  avoid->add_option("--streamlines", seeds, "Streamline seeds per axis")->check(CLI::Range(2, 200));

  std::string demos_path, config_path, model_path, report_path;
  int k = 8;
  std::uint64_t seed = 0;
  auto* train_cmd = app.add_subcommand("train", "Learn a model from demonstrations (ROAMKIT_SEED overrides --seed)");
  train_cmd->add_option("demos", demos_path, "Demonstration CSV")->required();
  train_cmd->add_option("--k", k, "Number of clusters")->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", seed, "Clustering seed");
  train_cmd->add_option("--config", config_path, "Training config JSON");
  train_cmd->add_option("--out", model_path, "Model JSON output")->required();
  train_cmd->add_option("--report", report_path, "Training report JSON output");

  std::string starts_path, rollouts_path, rollout_svg;
  int grid = 10;
  RolloutArgs rollout_args;
  auto* rollout = app.add_subcommand("rollout", "Integrate a learned model from start points");
  rollout->add_option("model", model_path, "Model JSON")->required();
  auto* starts_opt = rollout->add_option("--starts", starts_path, "Start CSV with an x,y header");
  rollout->add_option("--grid", grid, "N x N starts over the region of influence")
      ->check(CLI::Range(2, 1000))
      ->excludes(starts_opt);
  add_rollout_options(rollout, rollout_args);
  rollout->add_option("--out", rollouts_path, "Rollout CSV output")->required();
  rollout->add_option("--svg", rollout_svg, "SVG of the rollouts over the learned field");

  std::string eval_demos, eval_out;
  RolloutArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Compare model rollouts with demonstrations");
  eval->add_option("model", model_path, "Model JSON")->required();
  eval->add_option("demos", eval_demos, "Demonstration CSV")->required();
  add_rollout_options(eval, eval_args);
  eval->add_option("--out", eval_out, "Report JSON output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitBadInput;
  }

  try {
    if (*avoid) return cmd_avoid(scenario_path, engine, svg_path, csv_path, seeds);
    if (*train_cmd) return cmd_train(demos_path, k, seed, config_path, model_path, report_path);
    if (*rollout) return cmd_rollout(model_path, starts_path, grid, rollout_args, rollouts_path, rollout_svg);
    if (*eval) return cmd_eval(model_path, eval_demos, eval_args, eval_out);
  } catch (const TrainingError& e) {
    std::cerr << "training failed at stage " << e.what() << "\n";
    return kExitTraining;
  } catch (const InputError& e) {
    std::cerr << "bad input: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return 0;
}
