#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "lqrlab/bounds.hpp"
#include "lqrlab/ctrlmath.hpp"
#include "lqrlab/experiments.hpp"
#include "lqrlab/parallel.hpp"
#include "lqrlab/pg.hpp"
#include "lqrlab/plot.hpp"
#include "lqrlab/probgen.hpp"
#include "lqrlab/rng.hpp"
#include "lqrlab/types.hpp"

namespace lqrlab {
namespace {

SweepConfig tiny_config(ExperimentKind kind) {
  SweepConfig cfg;
  cfg.experiment = kind;
  cfg.recipe.n = 2;
  cfg.recipe.m = 2;
  cfg.recipe.horizon = 3;
  cfg.recipe.seed = 42;
  cfg.grid = {2.0, 0.5};        // deliberately unsorted
  cfg.scale_set = {1.0, 0.25};  // deliberately unsorted
  cfg.num_s1 = 2;
  cfg.num_traj = 3;
  return cfg;
}

std::string sweep_csv(ExperimentKind kind, const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  write_sweep_csv(os, kind, rows);
  return os.str();
}

std::string scatter_csv(const std::vector<ScatterRow>& rows) {
  std::ostringstream os;
  write_scatter_csv(os, rows);
  return os.str();
}

std::string curves_csv(const std::vector<CurvePoint>& rows) {
  std::ostringstream os;
  write_curves_csv(os, rows);
  return os.str();
}

bool rows_bitwise_equal(const SweepRow& a, const SweepRow& b) {
  // Field-by-field bitwise comparison via the CSV formatter, which prints
  // every double at full precision (and distinguishes nan from numbers).
  return sweep_csv(ExperimentKind::kSigmaA, {a}) ==
         sweep_csv(ExperimentKind::kSigmaA, {b});
}

TEST_SUITE("experiments") {

TEST_CASE("experiment names round-trip and reject unknowns") {
  const ExperimentKind kinds[] = {ExperimentKind::kSigmaA,
                                  ExperimentKind::kBMag, ExperimentKind::kRho,
                                  ExperimentKind::kScatter,
                                  ExperimentKind::kCurves};
  const char* names[] = {"sigma_a", "b_mag", "rho", "scatter", "curves"};
  for (int i = 0; i < 5; ++i) {
    CHECK(std::string(to_string(kinds[i])) == names[i]);
    CHECK(experiment_from_string(names[i]) == kinds[i]);
  }
  CHECK_THROWS_AS(experiment_from_string("bogus"), std::invalid_argument);
  CHECK_THROWS_AS(experiment_from_string(""), std::invalid_argument);
}

TEST_CASE("sigma_a sweep: row layout follows sorted scales and grid") {
  const SweepConfig cfg = tiny_config(ExperimentKind::kSigmaA);
  const auto rows = run_sigma_a_sweep(cfg);
  REQUIRE(rows.size() == 4);
  const double scales[] = {0.25, 0.25, 1.0, 1.0};
  const double values[] = {0.5, 2.0, 0.5, 2.0};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(rows[i].scale == scales[i]);
    CHECK(rows[i].sweep_value == values[i]);
    CHECK_FALSE(rows[i].flagged);
    CHECK(rows[i].bound_mean > 0.0);
    CHECK(rows[i].empirical_nu_mean > 0.0);
    CHECK(rows[i].empirical_second_moment_mean > 0.0);
    CHECK(rows[i].nu_std_error > 0.0);
    CHECK(rows[i].sm_std_error > 0.0);
    CHECK(std::isfinite(rows[i].bound_mean));
  }
  // The gain never moves during this sweep, so the achieved radius is one
  // number stamped on every row.
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(rows[i].rho_achieved == rows[0].rho_achieved);
  }
  CHECK(rows[0].rho_achieved > 0.0);
  CHECK(rows[0].rho_achieved < 1.0);
  // Larger process noise can only push the bound up (same grid value).
  CHECK(rows[2].bound_mean > rows[0].bound_mean);
  CHECK(rows[3].bound_mean > rows[1].bound_mean);
}

TEST_CASE("sigma_a sweep: matches a direct replay of its building blocks") {
  SweepConfig cfg = tiny_config(ExperimentKind::kSigmaA);
  cfg.grid = {0.5};
  cfg.scale_set = {1.0};
  const auto rows = run_sigma_a_sweep(cfg);
  REQUIRE(rows.size() == 1);
  REQUIRE_FALSE(rows[0].flagged);

  // Replay through the public pieces: same instance, same initial states,
  // same trajectory streams, same cached transient certificate.
  const auto [base, base_pol] = random_lqr(cfg.recipe);
  LqrProblem p = base;
  p.sigma_s = 1.0 * base.sigma_s;
  const GaussianPolicy pol{base_pol.k, 0.5 * Mat::Identity(2, 2)};
  TransientOptions topts;
  topts.allow_degenerate = true;
  topts.with_resolvent = false;
  const TransientBound transient =
      transient_bound_mu(p.a + p.b * base_pol.k, p.horizon, topts);

  double bound_sum = 0.0;
  double nu_sum = 0.0;
  double sm_sum = 0.0;
  double nu_var_sum = 0.0;
  double sm_var_sum = 0.0;
  for (std::uint64_t e = 0; e < 2; ++e) {
    NormalStream stream(RngKey{cfg.recipe.seed, StreamContext::kInitState, e, 0});
    const Vec s1 = (1.0 / std::sqrt(2.0)) * stream.next_vector(2);
    const VarianceEstimate est = estimate_moments(
        p, pol, s1, cfg.num_traj,
        RngKey{cfg.recipe.seed, StreamContext::kRollout, e, 0});
    bound_sum += upper_bound(p, pol, s1, transient).bound;
    nu_sum += est.nu_hat;
    sm_sum += est.second_moment_hat;
    nu_var_sum += est.std_error_nu * est.std_error_nu;
    sm_var_sum += est.std_error_second_moment * est.std_error_second_moment;
  }
  CHECK(rows[0].bound_mean == bound_sum / 2.0);
  CHECK(rows[0].empirical_nu_mean == nu_sum / 2.0);
  CHECK(rows[0].empirical_second_moment_mean == sm_sum / 2.0);
  CHECK(rows[0].nu_std_error == std::sqrt(nu_var_sum) / 2.0);
  CHECK(rows[0].sm_std_error == std::sqrt(sm_var_sum) / 2.0);
  CHECK(rows[0].rho_achieved ==
        spectral_radius(base.a + base.b * base_pol.k));
}

TEST_CASE("sigma_a sweep: common random numbers keep shared points identical") {
  SweepConfig narrow = tiny_config(ExperimentKind::kSigmaA);
  narrow.grid = {0.5};
  SweepConfig wide = tiny_config(ExperimentKind::kSigmaA);
  wide.grid = {0.5, 2.0};

  const auto rows_narrow = run_sigma_a_sweep(narrow);
  const auto rows_wide = run_sigma_a_sweep(wide);
  REQUIRE(rows_narrow.size() == 2);
  REQUIRE(rows_wide.size() == 4);
  // (scale 0.25, v 0.5) and (scale 1.0, v 0.5) exist in both runs and must
  // be bitwise identical: adding grid points cannot disturb existing ones.
  CHECK(rows_bitwise_equal(rows_narrow[0], rows_wide[0]));
  CHECK(rows_bitwise_equal(rows_narrow[1], rows_wide[2]));
}

TEST_CASE("sigma_a sweep: reruns and thread counts do not change the bytes") {
  const SweepConfig cfg = tiny_config(ExperimentKind::kSigmaA);
  const int old_threads = num_threads();
  const auto rows1 = run_sigma_a_sweep(cfg);
  set_num_threads(4);
  const auto rows2 = run_sigma_a_sweep(cfg);
  set_num_threads(old_threads);
  const auto rows3 = run_sigma_a_sweep(cfg);
  const std::string csv1 = sweep_csv(ExperimentKind::kSigmaA, rows1);
  CHECK(csv1 == sweep_csv(ExperimentKind::kSigmaA, rows2));
  CHECK(csv1 == sweep_csv(ExperimentKind::kSigmaA, rows3));
}

TEST_CASE("sigma_a sweep: config validation") {
  SweepConfig cfg = tiny_config(ExperimentKind::kSigmaA);
  cfg.grid.clear();
  CHECK_THROWS_AS(run_sigma_a_sweep(cfg), std::invalid_argument);
  cfg = tiny_config(ExperimentKind::kSigmaA);
  cfg.grid = {1.0, 0.0};
  CHECK_THROWS_AS(run_sigma_a_sweep(cfg), std::invalid_argument);
  cfg = tiny_config(ExperimentKind::kSigmaA);
  cfg.grid = {1.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(run_sigma_a_sweep(cfg), std::invalid_argument);
  cfg = tiny_config(ExperimentKind::kSigmaA);
  cfg.scale_set.clear();
  CHECK_THROWS_AS(run_sigma_a_sweep(cfg), std::invalid_argument);
  cfg = tiny_config(ExperimentKind::kSigmaA);
  cfg.scale_set = {1.0, -2.0};
  CHECK_THROWS_AS(run_sigma_a_sweep(cfg), std::invalid_argument);
  cfg = tiny_config(ExperimentKind::kSigmaA);
  cfg.num_s1 = 0;
  CHECK_THROWS_AS(run_sigma_a_sweep(cfg), std::invalid_argument);
  cfg = tiny_config(ExperimentKind::kSigmaA);
  cfg.num_traj = 1;
  CHECK_THROWS_AS(run_sigma_a_sweep(cfg), std::invalid_argument);
}

TEST_CASE("sigma_a sweep: overflow-scale grid points flag instead of abort") {
  SweepConfig cfg = tiny_config(ExperimentKind::kSigmaA);
  cfg.grid = {1.0, 1e200};  // second moments overflow to inf at 1e200
  const auto rows = run_sigma_a_sweep(cfg);
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    CHECK(row.flagged == (row.sweep_value == 1e200));
  }
  CHECK(count_flagged(rows) == 2);
  // Flagged rows still serialize; booleans land in the last column.
  const std::string csv = sweep_csv(ExperimentKind::kSigmaA, rows);
  CHECK(csv.find(",1\n") != std::string::npos);
  CHECK(csv.find(",0\n") != std::string::npos);
}

TEST_CASE("b_mag sweep: square-input requirement and per-point gains") {
  SweepConfig cfg = tiny_config(ExperimentKind::kBMag);
  cfg.recipe.n = 3;  // m stays 2: not square
  CHECK_THROWS_AS(run_bmag_sweep(cfg), std::invalid_argument);

  cfg = tiny_config(ExperimentKind::kBMag);
  cfg.scale_set = {1.0};
  const auto rows = run_bmag_sweep(cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].sweep_value == 0.5);
  CHECK(rows[1].sweep_value == 2.0);
  for (const auto& row : rows) {
    CHECK_FALSE(row.flagged);
    CHECK(row.bound_mean > 0.0);
    CHECK(row.rho_achieved > 0.0);
    CHECK(row.rho_achieved < 1.0);
  }
  // The gain is re-optimized per input magnitude, so the achieved closed-loop
  // radius moves along the grid.
  CHECK(rows[0].rho_achieved != rows[1].rho_achieved);

  cfg.grid = {0.0};
  CHECK_THROWS_AS(run_bmag_sweep(cfg), std::invalid_argument);
  cfg.grid = {-1.0};
  CHECK_THROWS_AS(run_bmag_sweep(cfg), std::invalid_argument);
}

TEST_CASE("b_mag sweep: deterministic bytes") {
  SweepConfig cfg = tiny_config(ExperimentKind::kBMag);
  const auto rows1 = run_bmag_sweep(cfg);
  const int old_threads = num_threads();
  set_num_threads(3);
  const auto rows2 = run_bmag_sweep(cfg);
  set_num_threads(old_threads);
  CHECK(sweep_csv(ExperimentKind::kBMag, rows1) ==
        sweep_csv(ExperimentKind::kBMag, rows2));
}

TEST_CASE("rho sweep: placement hits the requested radii") {
  SweepConfig cfg = tiny_config(ExperimentKind::kRho);
  cfg.recipe.n = 3;
  cfg.recipe.m = 2;
  cfg.grid = {0.3, 0.8};
  cfg.scale_set = {1.0, 0.25};
  const auto rows = run_rho_sweep(cfg);
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    REQUIRE_FALSE(row.flagged);
    CHECK(std::abs(row.rho_achieved - row.sweep_value) <= 1e-4);
    CHECK(row.bound_mean > 0.0);
    CHECK(std::isfinite(row.bound_mean));
  }
  // Same grid point, different noise family: the measurement must move.
  CHECK(rows[0].bound_mean != rows[2].bound_mean);

  SweepConfig bad = cfg;
  bad.grid = {0.0};
  CHECK_THROWS_AS(run_rho_sweep(bad), std::invalid_argument);
  bad.grid = {1.0};
  CHECK_THROWS_AS(run_rho_sweep(bad), std::invalid_argument);
  bad.grid = {-0.2};
  CHECK_THROWS_AS(run_rho_sweep(bad), std::invalid_argument);
}

TEST_CASE("rho sweep: deterministic bytes") {
  SweepConfig cfg = tiny_config(ExperimentKind::kRho);
  cfg.recipe.n = 3;
  cfg.grid = {0.4, 0.9};
  cfg.scale_set = {1.0};
  const auto rows1 = run_rho_sweep(cfg);
  const auto rows2 = run_rho_sweep(cfg);
  CHECK(sweep_csv(ExperimentKind::kRho, rows1) ==
        sweep_csv(ExperimentKind::kRho, rows2));
}

TEST_CASE("scatter: cycles problem sizes and stays finite") {
  SweepConfig cfg = tiny_config(ExperimentKind::kScatter);
  cfg.recipe.seed = 7;
  cfg.num_problems = 4;
  const auto rows = run_scatter(cfg);
  REQUIRE(rows.size() == 4);
  const int ns[] = {3, 3, 3, 10};
  const int ms[] = {2, 2, 2, 5};
  const int hs[] = {3, 10, 30, 3};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(rows[i].n == ns[i]);
    CHECK(rows[i].m == ms[i]);
    CHECK(rows[i].horizon == hs[i]);
    CHECK_FALSE(rows[i].flagged);
    CHECK(rows[i].empirical_second_moment_mean > 0.0);
    CHECK(rows[i].empirical_nu_mean > 0.0);
    CHECK(rows[i].bound_mean > 0.0);
    CHECK(rows[i].sm_std_error > 0.0);
    CHECK(std::isfinite(rows[i].bound_mean));
  }

  const int old_threads = num_threads();
  set_num_threads(4);
  const auto rows2 = run_scatter(cfg);
  set_num_threads(old_threads);
  CHECK(scatter_csv(rows) == scatter_csv(rows2));

  cfg.num_problems = 0;
  CHECK_THROWS_AS(run_scatter(cfg), std::invalid_argument);
}

TEST_CASE("learning curves: checkpoint schedule, grouping and aggregation") {
  SweepConfig cfg = tiny_config(ExperimentKind::kCurves);
  cfg.recipe.seed = 33;
  cfg.grid = {1.0, 0.5};  // sigma_a scales, unsorted
  cfg.scale_set = {1.0};
  cfg.curve_runs = 2;
  cfg.curve_iters = 4;
  cfg.eval_every = 2;
  cfg.num_eval_states = 2;
  cfg.batch = 1;
  cfg.step_size = 1e-5;
  cfg.init_rho = 0.9;
  const auto rows = run_learning_curves(cfg);
  REQUIRE(rows.size() == 6);
  const double sas[] = {0.5, 0.5, 0.5, 1.0, 1.0, 1.0};
  const int its[] = {0, 2, 4, 0, 2, 4};
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(rows[i].sigma_a_scale == sas[i]);
    CHECK(rows[i].sigma_s_scale == 1.0);
    CHECK(rows[i].iteration == its[i]);
    CHECK(std::isfinite(rows[i].eval_return_mean));
    CHECK(rows[i].eval_return_mean < 0.0);  // returns are negative costs
    CHECK(rows[i].eval_return_std >= 0.0);
    CHECK_FALSE(rows[i].diverged);
    if (its[i] == 0) {
      CHECK(std::isnan(rows[i].train_return_mean));
    } else {
      CHECK(std::isfinite(rows[i].train_return_mean));
      CHECK(rows[i].train_return_mean < 0.0);
    }
  }

  const int old_threads = num_threads();
  set_num_threads(3);
  const auto rows2 = run_learning_curves(cfg);
  set_num_threads(old_threads);
  CHECK(curves_csv(rows) == curves_csv(rows2));
}

TEST_CASE("learning curves: config validation") {
  const SweepConfig good = [] {
    SweepConfig cfg = tiny_config(ExperimentKind::kCurves);
    cfg.recipe.seed = 33;  // closed loop comfortably below init_rho
    cfg.grid = {1.0};
    cfg.scale_set = {1.0};
    cfg.curve_runs = 1;
    cfg.curve_iters = 1;
    cfg.eval_every = 1;
    cfg.num_eval_states = 1;
    cfg.batch = 1;
    cfg.init_rho = 0.9;
    return cfg;
  }();
  CHECK_NOTHROW(run_learning_curves(good));

  SweepConfig bad = good;
  bad.grid = {0.0};
  CHECK_THROWS_AS(run_learning_curves(bad), std::invalid_argument);
  bad = good;
  bad.curve_runs = 0;
  CHECK_THROWS_AS(run_learning_curves(bad), std::invalid_argument);
  bad = good;
  bad.curve_iters = 0;
  CHECK_THROWS_AS(run_learning_curves(bad), std::invalid_argument);
  bad = good;
  bad.eval_every = 0;
  CHECK_THROWS_AS(run_learning_curves(bad), std::invalid_argument);
  bad = good;
  bad.num_eval_states = 0;
  CHECK_THROWS_AS(run_learning_curves(bad), std::invalid_argument);
  bad = good;
  bad.batch = 0;
  CHECK_THROWS_AS(run_learning_curves(bad), std::invalid_argument);
  bad = good;
  bad.step_size = -1.0;
  CHECK_THROWS_AS(run_learning_curves(bad), std::invalid_argument);
  bad = good;
  bad.init_rho = 0.0;
  CHECK_THROWS_AS(run_learning_curves(bad), std::invalid_argument);
  bad = good;
  bad.init_rho = 1.0;
  CHECK_THROWS_AS(run_learning_curves(bad), std::invalid_argument);
}

TEST_CASE("sweep CSV writer: golden bytes") {
  SweepRow row;
  row.sweep_value = 0.5;
  row.scale = 1.0;
  row.bound_mean = 2.0;
  row.empirical_nu_mean = 1.5;
  row.empirical_second_moment_mean = 3.0;
  row.nu_std_error = 0.25;
  row.rho_achieved = 0.5;
  row.sm_std_error = 0.125;
  row.flagged = false;

  SweepRow bad;
  bad.sweep_value = 0.25;
  bad.scale = 4.0;
  bad.bound_mean = std::numeric_limits<double>::quiet_NaN();
  bad.empirical_nu_mean = bad.bound_mean;
  bad.empirical_second_moment_mean = bad.bound_mean;
  bad.nu_std_error = bad.bound_mean;
  bad.rho_achieved = bad.bound_mean;
  bad.sm_std_error = bad.bound_mean;
  bad.flagged = true;

  CHECK(sweep_csv(ExperimentKind::kSigmaA, {row, bad}) ==
        "# lqrlab-csv v1 kind=sweep experiment=sigma_a\n"
        "sweep_value,scale,bound_mean,empirical_nu_mean,"
        "empirical_second_moment_mean,nu_std_error,rho_achieved,"
        "sm_std_error,flagged\n"
        "0.5,1,2,1.5,3,0.25,0.5,0.125,0\n"
        "0.25,4,nan,nan,nan,nan,nan,nan,1\n");
  CHECK(sweep_csv(ExperimentKind::kRho, {})
            .starts_with("# lqrlab-csv v1 kind=sweep experiment=rho\n"));
}

TEST_CASE("scatter CSV writer: golden bytes") {
  ScatterRow row;
  row.n = 3;
  row.m = 2;
  row.horizon = 10;
  row.empirical_second_moment_mean = 2.0;
  row.sm_std_error = 0.5;
  row.empirical_nu_mean = 1.5;
  row.bound_mean = 64.0;
  row.flagged = false;
  CHECK(scatter_csv({row}) ==
        "# lqrlab-csv v1 kind=scatter experiment=scatter\n"
        "n,m,horizon,empirical_second_moment_mean,sm_std_error,"
        "empirical_nu_mean,bound_mean,flagged\n"
        "3,2,10,2,0.5,1.5,64,0\n");
}

TEST_CASE("curves CSV writer: golden bytes") {
  CurvePoint pt;
  pt.sigma_a_scale = 0.5;
  pt.sigma_s_scale = 2.0;
  pt.iteration = 10;
  pt.eval_return_mean = -3.5;
  pt.eval_return_std = 0.25;
  pt.train_return_mean = -4.0;
  pt.diverged = false;
  CurvePoint start;
  start.sigma_a_scale = 0.5;
  start.sigma_s_scale = 2.0;
  start.iteration = 0;
  start.eval_return_mean = -3.0;
  start.eval_return_std = 0.0;
  start.train_return_mean = std::numeric_limits<double>::quiet_NaN();
  start.diverged = true;
  CHECK(curves_csv({start, pt}) ==
        "# lqrlab-csv v1 kind=curves experiment=curves\n"
        "sigma_a_scale,sigma_s_scale,iteration,eval_return_mean,"
        "eval_return_std,train_return_mean,diverged\n"
        "0.5,2,0,-3,0,nan,1\n"
        "0.5,2,10,-3.5,0.25,-4,0\n");
}

TEST_CASE("count_flagged counts per row type") {
  std::vector<SweepRow> sweep(3);
  sweep[0].flagged = true;
  sweep[2].flagged = true;
  CHECK(count_flagged(sweep) == 2);

  std::vector<ScatterRow> scatter(2);
  CHECK(count_flagged(scatter) == 0);

  std::vector<CurvePoint> curves(3);
  curves[1].diverged = true;
  CHECK(count_flagged(curves) == 1);
}

}  // TEST_SUITE("experiments")

// ---------------------------------------------------------------------------

std::filesystem::path plot_dir() {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("lqrlab_plot_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_text(const std::filesystem::path& path,
                       const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path.string();
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t count_occurrences(const std::string& hay,
                              const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

std::vector<SweepRow> synthetic_sweep_rows() {
  std::vector<SweepRow> rows;
  for (const double scale : {1.0, 10.0}) {
    for (const double v : {0.1, 1.0, 10.0}) {
      SweepRow row;
      row.sweep_value = v;
      row.scale = scale;
      row.bound_mean = 100.0 * scale * (1.0 + v);
      row.empirical_nu_mean = scale * (1.0 + 0.5 * v);
      row.empirical_second_moment_mean = 2.0 * row.empirical_nu_mean;
      row.nu_std_error = 0.1;
      row.rho_achieved = 0.7;
      row.sm_std_error = 0.2;
      row.flagged = false;
      rows.push_back(row);
    }
  }
  return rows;
}

TEST_SUITE("plot") {

TEST_CASE("sweep SVG: two panels, one polyline per scale family, stable bytes") {
  const auto dir = plot_dir();
  const std::string csv =
      write_text(dir / "sweep.csv",
                 sweep_csv(ExperimentKind::kSigmaA, synthetic_sweep_rows()));
  const std::string svg_path = (dir / "sweep.svg").string();
  render_plots(csv, svg_path);
  const std::string svg = slurp(svg_path);
  CHECK(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
  CHECK(svg.ends_with("</svg>\n"));
  // Two scale families on each of the two panels.
  CHECK(count_occurrences(svg, "<polyline") == 4);

  const std::string svg_path2 = (dir / "sweep_again.svg").string();
  render_plots(csv, svg_path2);
  CHECK(svg == slurp(svg_path2));

  PlotOptions linear;
  linear.log_y = false;
  const std::string svg_path3 = (dir / "sweep_linear.svg").string();
  render_plots(csv, svg_path3, linear);
  const std::string svg_linear = slurp(svg_path3);
  CHECK(svg_linear.starts_with("<svg "));
  CHECK(svg_linear != svg);
}

TEST_CASE("sweep SVG: flagged rows are dropped, the rest still renders") {
  std::vector<SweepRow> rows = synthetic_sweep_rows();
  rows[1].flagged = true;
  rows[1].bound_mean = std::numeric_limits<double>::quiet_NaN();
  rows[1].empirical_nu_mean = rows[1].bound_mean;
  const auto dir = plot_dir();
  const std::string csv = write_text(
      dir / "sweep_flagged.csv", sweep_csv(ExperimentKind::kBMag, rows));
  const std::string svg_path = (dir / "sweep_flagged.svg").string();
  render_plots(csv, svg_path);
  CHECK(slurp(svg_path).starts_with("<svg "));
}

TEST_CASE("sweep SVG: real sigma_a output renders end to end") {
  SweepConfig cfg;
  cfg.experiment = ExperimentKind::kSigmaA;
  cfg.recipe.n = 2;
  cfg.recipe.m = 2;
  cfg.recipe.horizon = 3;
  cfg.recipe.seed = 42;
  cfg.grid = {0.5, 2.0};
  cfg.scale_set = {1.0};
  cfg.num_s1 = 2;
  cfg.num_traj = 3;
  const auto rows = run_sigma_a_sweep(cfg);
  const auto dir = plot_dir();
  const std::string csv = write_text(
      dir / "real_sweep.csv", sweep_csv(ExperimentKind::kSigmaA, rows));
  const std::string svg_path = (dir / "real_sweep.svg").string();
  render_plots(csv, svg_path);
  const std::string svg = slurp(svg_path);
  CHECK(svg.starts_with("<svg "));
  CHECK(count_occurrences(svg, "<polyline") == 2);

  const std::string svg_path2 = (dir / "real_sweep_again.svg").string();
  render_plots(csv, svg_path2);
  CHECK(svg == slurp(svg_path2));
}

TEST_CASE("scatter SVG: identity line and one marker per row") {
  std::vector<ScatterRow> rows(3);
  rows[0] = {3, 2, 3, 5.0, 0.5, 4.0, 10.0, false};
  rows[1] = {10, 5, 10, 50.0, 5.0, 40.0, 100.0, false};
  rows[2] = {3, 2, 30, 800.0, 80.0, 700.0, 1000.0, false};
  const auto dir = plot_dir();
  const std::string csv =
      write_text(dir / "scatter.csv", scatter_csv(rows));
  const std::string svg_path = (dir / "scatter.svg").string();
  render_plots(csv, svg_path);
  const std::string svg = slurp(svg_path);
  CHECK(svg.starts_with("<svg "));
  CHECK(svg.find("y = x") != std::string::npos);
  CHECK(count_occurrences(svg, "<circle") == 3);

  const std::string svg_path2 = (dir / "scatter_again.svg").string();
  render_plots(csv, svg_path2);
  CHECK(svg == slurp(svg_path2));
}

TEST_CASE("curves SVG: one band-backed series per noise cell") {
  std::vector<CurvePoint> rows;
  for (const double sa : {0.1, 1.0}) {
    for (const int it : {0, 10, 20}) {
      CurvePoint pt;
      pt.sigma_a_scale = sa;
      pt.sigma_s_scale = 1.0;
      pt.iteration = it;
      pt.eval_return_mean = -10.0 + 0.1 * it + sa;
      pt.eval_return_std = 0.5;
      pt.train_return_mean =
          it == 0 ? std::numeric_limits<double>::quiet_NaN()
                  : -11.0 + 0.1 * it;
      pt.diverged = false;
      rows.push_back(pt);
    }
  }
  const auto dir = plot_dir();
  const std::string csv = write_text(dir / "curves.csv", curves_csv(rows));
  const std::string svg_path = (dir / "curves.svg").string();
  render_plots(csv, svg_path);
  const std::string svg = slurp(svg_path);
  CHECK(svg.starts_with("<svg "));
  CHECK(count_occurrences(svg, "<polyline") == 2);
  CHECK(count_occurrences(svg, "<polygon") == 2);

  const std::string svg_path2 = (dir / "curves_again.svg").string();
  render_plots(csv, svg_path2);
  CHECK(svg == slurp(svg_path2));
}

TEST_CASE("render_plots: malformed inputs throw and leave no output behind") {
  const auto dir = plot_dir();
  auto expect_failure = [&](const std::string& name, const std::string& text) {
    const std::string csv = write_text(dir / (name + ".csv"), text);
    const std::string svg = (dir / (name + ".svg")).string();
    CHECK_THROWS_AS(render_plots(csv, svg), std::runtime_error);
    CHECK_FALSE(std::filesystem::exists(svg));
  };

  // Missing file.
  const std::string missing_svg = (dir / "missing.svg").string();
  CHECK_THROWS_AS(render_plots((dir / "nope.csv").string(), missing_svg),
                  std::runtime_error);
  CHECK_FALSE(std::filesystem::exists(missing_svg));

  expect_failure("empty", "");
  expect_failure("bad_schema", "not a schema line\nx,y\n1,2\n");
  expect_failure("no_kind", "# lqrlab-csv v1 experiment=sigma_a\nx,y\n1,2\n");
  expect_failure("bad_kind", "# lqrlab-csv v1 kind=heatmap\nx,y\n1,2\n");
  expect_failure("missing_column",
                 "# lqrlab-csv v1 kind=sweep experiment=sigma_a\n"
                 "foo,bar\n1,2\n");

  const std::string good = sweep_csv(ExperimentKind::kSigmaA,
                                     synthetic_sweep_rows());
  expect_failure("short_row", good + "1,2\n");
  expect_failure("bad_number",
                 good.substr(0, good.size() - std::string("0\n").size()) +
                     "zero\n");

  // Structurally fine but nothing drawable.
  SweepRow flagged;
  flagged.flagged = true;
  expect_failure("all_flagged",
                 sweep_csv(ExperimentKind::kSigmaA, {flagged}));
  expect_failure("no_rows", sweep_csv(ExperimentKind::kSigmaA, {}));
  ScatterRow sflag;
  sflag.flagged = true;
  expect_failure("all_flagged_scatter", scatter_csv({sflag}));
  expect_failure("empty_curves", curves_csv({}));
}

}  // TEST_SUITE("plot")

}  // namespace
}  // namespace lqrlab
