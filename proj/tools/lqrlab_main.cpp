// lqrlab: command-line front end for the LQR gradient-variance laboratory.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure
// (numerical or I/O), 4 success with flagged rows in the output.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lqrlab/experiments.hpp"
#include "lqrlab/parallel.hpp"
#include "lqrlab/plot.hpp"
#include "lqrlab/probgen.hpp"
#include "lqrlab/serialize.hpp"

namespace {

using nlohmann::json;

std::vector<double> spaced_grid(double lo, double hi, int points,
                                bool geometric) {
  if (points < 1) {
    throw std::invalid_argument("grid: --grid-points must be >= 1");
  }
  if (!(lo > 0.0) && geometric) {
    throw std::invalid_argument("grid: geometric grids need --grid-min > 0");
  }
  if (hi < lo) {
    throw std::invalid_argument("grid: --grid-max must be >= --grid-min");
  }
  std::vector<double> grid(static_cast<std::size_t>(points));
  if (points == 1) {
    grid[0] = lo;
    return grid;
  }
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    grid[static_cast<std::size_t>(i)] =
        geometric ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                  : lo + t * (hi - lo);
  }
  return grid;
}

std::string default_out_path(const std::string& experiment) {
  const char* dir = std::getenv("LQRLAB_OUT_DIR");
  const std::string base = (dir != nullptr && *dir != '\0')
                               ? std::string(dir)
                               : std::string(".");
  return base + "/" + experiment + ".csv";
}

std::string svg_path_for(const std::string& csv_path) {
  if (csv_path.size() >= 4 &&
      csv_path.compare(csv_path.size() - 4, 4, ".csv") == 0) {
    return csv_path.substr(0, csv_path.size() - 4) + ".svg";
  }
  return csv_path + ".svg";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << content;
  if (!out.good()) {
    throw std::runtime_error("write to '" + path + "' failed");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "lqrlab - policy-gradient variance laboratory for stochastic LQR "
      "systems"};
  app.set_config("--config", "", "read key=value defaults from a file");
  app.option_defaults()->always_capture_default();

  std::string experiment_name;
  app.add_option("--experiment", experiment_name,
                 "experiment to run: sigma_a | b_mag | rho | scatter | "
                 "curves");

  lqrlab::SweepConfig cfg;
  app.add_option("--seed", cfg.recipe.seed, "master seed");
  app.add_option("--n", cfg.recipe.n, "state dimension")
      ->check(CLI::PositiveNumber);
  auto* m_opt = app.add_option("--m", cfg.recipe.m, "action dimension")
                    ->check(CLI::PositiveNumber);
  app.add_option("--horizon", cfg.recipe.horizon, "episode length")
      ->check(CLI::PositiveNumber);
  app.add_option("--sigma-s-scale", cfg.recipe.sigma_s_scale,
                 "base process-noise covariance scale")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--sigma-a-scale", cfg.recipe.sigma_a_scale,
                 "base exploration covariance scale")
      ->check(CLI::PositiveNumber);

  double grid_min = 0.0;
  double grid_max = 0.0;
  int grid_points = 0;
  auto* gmin_opt = app.add_option("--grid-min", grid_min,
                                  "smallest sweep value");
  auto* gmax_opt = app.add_option("--grid-max", grid_max,
                                  "largest sweep value");
  auto* gpts_opt = app.add_option("--grid-points", grid_points,
                                  "number of sweep values");
  app.add_option("--scales", cfg.scale_set,
                 "comma-separated noise-scale family (default 0.1,1,10)")
      ->delimiter(',');
  app.add_option("--num-s1", cfg.num_s1,
                 "initial-state replicates per sweep point")
      ->check(CLI::PositiveNumber);
  app.add_option("--num-traj", cfg.num_traj,
                 "trajectories per initial state")
      ->check(CLI::Range(2, 1 << 30));
  app.add_option("--num-problems", cfg.num_problems,
                 "scatter: number of random instances")
      ->check(CLI::PositiveNumber);
  app.add_option("--runs", cfg.curve_runs, "curves: training runs per cell")
      ->check(CLI::PositiveNumber);
  app.add_option("--iters", cfg.curve_iters,
                 "curves: gradient iterations per run")
      ->check(CLI::PositiveNumber);
  app.add_option("--eval-every", cfg.eval_every,
                 "curves: checkpoint cadence in iterations")
      ->check(CLI::PositiveNumber);
  app.add_option("--num-eval-states", cfg.num_eval_states,
                 "curves: size of the fixed evaluation set")
      ->check(CLI::PositiveNumber);
  app.add_option("--step-size", cfg.step_size, "curves: ascent step size")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--batch", cfg.batch, "curves: episodes per iteration")
      ->check(CLI::PositiveNumber);
  app.add_option("--init-rho", cfg.init_rho,
                 "curves: spectral radius of the perturbed starting gain");

  std::string out_path;
  app.add_option("--out", out_path,
                 "output CSV path (default $LQRLAB_OUT_DIR/<experiment>.csv)");
  bool render = false;
  app.add_flag("--render", render, "also render the SVG figure");
  bool linear_y = false;
  app.add_flag("--linear-y", linear_y,
               "use linear value axes in rendered figures");
  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads (results are thread-count independent)")
      ->check(CLI::PositiveNumber);
  std::string emit_problem_path;
  app.add_option("--emit-problem", emit_problem_path,
                 "write the generated problem instance to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  const auto started = std::chrono::steady_clock::now();
  try {
    if (threads > 0) lqrlab::set_num_threads(threads);
    if (experiment_name.empty() && emit_problem_path.empty()) {
      std::cerr << "error: pass --experiment (or --emit-problem); see --help"
                << '\n';
      return 2;
    }

    if (!emit_problem_path.empty()) {
      const auto [p, pol] = lqrlab::random_lqr(cfg.recipe);
      std::ostringstream comment;
      comment << "sampled instance, seed " << cfg.recipe.seed;
      lqrlab::save_problem(emit_problem_path, p, pol, comment.str());
      std::cout << "wrote problem instance to " << emit_problem_path << '\n';
      if (experiment_name.empty()) return 0;
    }

    cfg.experiment = lqrlab::experiment_from_string(experiment_name);

    // b_mag needs a square input map; follow --n unless --m was explicit.
    if (cfg.experiment == lqrlab::ExperimentKind::kBMag &&
        m_opt->count() == 0) {
      cfg.recipe.m = cfg.recipe.n;
    }

    // Grid defaults depend on the experiment; explicit flags win.
    const bool grid_given =
        gmin_opt->count() || gmax_opt->count() || gpts_opt->count();
    const bool geometric =
        cfg.experiment != lqrlab::ExperimentKind::kRho;
    switch (cfg.experiment) {
      case lqrlab::ExperimentKind::kSigmaA:
      case lqrlab::ExperimentKind::kBMag:
        if (!gmin_opt->count()) grid_min = 1e-2;
        if (!gmax_opt->count()) grid_max = 1e2;
        if (!gpts_opt->count()) grid_points = 25;
        break;
      case lqrlab::ExperimentKind::kRho:
        if (!gmin_opt->count()) grid_min = 0.05;
        if (!gmax_opt->count()) grid_max = 0.95;
        if (!gpts_opt->count()) grid_points = 19;
        break;
      case lqrlab::ExperimentKind::kCurves:
        if (!gmin_opt->count()) grid_min = 1e-2;
        if (!gmax_opt->count()) grid_max = 1.0;
        if (!gpts_opt->count()) grid_points = 3;
        break;
      case lqrlab::ExperimentKind::kScatter:
        break;  // no grid
    }
    if (cfg.experiment != lqrlab::ExperimentKind::kScatter) {
      cfg.grid = spaced_grid(grid_min, grid_max, grid_points, geometric);
    }

    if (out_path.empty()) out_path = default_out_path(experiment_name);

    std::int64_t flagged = 0;
    std::ostringstream csv;
    switch (cfg.experiment) {
      case lqrlab::ExperimentKind::kSigmaA: {
        const auto rows = lqrlab::run_sigma_a_sweep(cfg);
        lqrlab::write_sweep_csv(csv, cfg.experiment, rows);
        flagged = lqrlab::count_flagged(rows);
        break;
      }
      case lqrlab::ExperimentKind::kBMag: {
        const auto rows = lqrlab::run_bmag_sweep(cfg);
        lqrlab::write_sweep_csv(csv, cfg.experiment, rows);
        flagged = lqrlab::count_flagged(rows);
        break;
      }
      case lqrlab::ExperimentKind::kRho: {
        const auto rows = lqrlab::run_rho_sweep(cfg);
        lqrlab::write_sweep_csv(csv, cfg.experiment, rows);
        flagged = lqrlab::count_flagged(rows);
        break;
      }
      case lqrlab::ExperimentKind::kScatter: {
        const auto rows = lqrlab::run_scatter(cfg);
        lqrlab::write_scatter_csv(csv, rows);
        flagged = lqrlab::count_flagged(rows);
        break;
      }
      case lqrlab::ExperimentKind::kCurves: {
        const auto rows = lqrlab::run_learning_curves(cfg);
        lqrlab::write_curves_csv(csv, rows);
        flagged = lqrlab::count_flagged(rows);
        break;
      }
    }
    write_text_file(out_path, csv.str());

    std::string svg_path;
    if (render) {
      lqrlab::PlotOptions popts;
      popts.log_y = !linear_y;
      svg_path = svg_path_for(out_path);
      lqrlab::render_plots(out_path, svg_path, popts);
    }

    const double wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started)
            .count();
    json meta;
    meta["format"] = "lqrlab.meta.v1";
    meta["experiment"] = experiment_name;
    meta["seed"] = cfg.recipe.seed;
    meta["n"] = cfg.recipe.n;
    meta["m"] = cfg.recipe.m;
    meta["horizon"] = cfg.recipe.horizon;
    meta["sigma_s_scale"] = cfg.recipe.sigma_s_scale;
    meta["sigma_a_scale"] = cfg.recipe.sigma_a_scale;
    meta["grid"] = cfg.grid;
    meta["scales"] = cfg.scale_set;
    meta["num_s1"] = cfg.num_s1;
    meta["num_traj"] = cfg.num_traj;
    meta["num_problems"] = cfg.num_problems;
    meta["curves"] = {{"runs", cfg.curve_runs},
                      {"iters", cfg.curve_iters},
                      {"eval_every", cfg.eval_every},
                      {"num_eval_states", cfg.num_eval_states},
                      {"step_size", cfg.step_size},
                      {"batch", cfg.batch},
                      {"init_rho", cfg.init_rho}};
    meta["threads"] = lqrlab::num_threads();
    meta["out_csv"] = out_path;
    if (!svg_path.empty()) meta["svg"] = svg_path;
    meta["flagged_rows"] = flagged;
    meta["wall_time_seconds"] = wall_seconds;
    write_text_file(out_path + ".meta.json", meta.dump(2) + "\n");

    std::cout << "wrote " << out_path;
    if (!svg_path.empty()) std::cout << " and " << svg_path;
    std::cout << " (" << flagged << " flagged rows)\n";
    return flagged > 0 ? 4 : 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return 3;
  }
}
