#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lqrlab/probgen.hpp"
#include "lqrlab/types.hpp"

namespace lqrlab {

enum class ExperimentKind { kSigmaA, kBMag, kRho, kScatter, kCurves };

const char* to_string(ExperimentKind kind);
// Throws std::invalid_argument for unknown names.
ExperimentKind experiment_from_string(const std::string& name);

// Shared configuration for all experiment drivers. Each driver reads the
// subset it needs and validates it (std::invalid_argument on bad values).
struct SweepConfig {
  ExperimentKind experiment = ExperimentKind::kSigmaA;
  ProblemRecipe recipe;            // base instance; seed drives everything
  std::vector<double> grid;        // sweep values (sigma_a / b scale, target
                                   // rho, or sigma_a scales for curves)
  std::vector<double> scale_set = {0.1, 1.0, 10.0};  // noise-scale families
  int num_s1 = 100;    // initial-state replicates per sweep point
  int num_traj = 30;   // trajectories per initial state
  int num_problems = 1000;  // scatter only
  // Learning-curve knobs.
  int curve_runs = 10;
  int curve_iters = 300;
  int eval_every = 10;
  int num_eval_states = 100;
  double step_size = 1e-4;
  int batch = 1;
  double init_rho = 0.98;  // spectral radius of the perturbed initial gain
};

// One sweep measurement: analytic bound and Monte-Carlo estimator moments,
// averaged over the initial-state replicates.
struct SweepRow {
  double sweep_value = 0.0;
  double scale = 0.0;
  double bound_mean = 0.0;
  double empirical_nu_mean = 0.0;
  double empirical_second_moment_mean = 0.0;
  double nu_std_error = 0.0;
  double rho_achieved = 0.0;
  double sm_std_error = 0.0;  // standard error of the second-moment mean
  bool flagged = false;       // non-finite values or per-point failure
};

// Exploration-noise sweep: one random instance, gain fixed at the Riccati
// optimum, sigma_a = v I over the grid, process noise scaled per family.
std::vector<SweepRow> run_sigma_a_sweep(const SweepConfig& cfg);

// Control-authority sweep (requires m == n): b = v I over the grid with the
// gain re-optimized per point; both noise covariances scaled per family.
std::vector<SweepRow> run_bmag_sweep(const SweepConfig& cfg);

// Stability sweep: one eigenvalue prototype rescaled so the closed-loop
// spectral radius hits each grid target, realized by pole placement; both
// noise covariances scaled per family. Placement failures flag the affected
// rows instead of aborting.
std::vector<SweepRow> run_rho_sweep(const SweepConfig& cfg);

struct ScatterRow {
  int n = 0;
  int m = 0;
  int horizon = 0;
  double empirical_second_moment_mean = 0.0;
  double sm_std_error = 0.0;
  double empirical_nu_mean = 0.0;
  double bound_mean = 0.0;
  bool flagged = false;
};

// Bound-versus-measurement scatter over num_problems random instances
// cycling through n, horizon in {3, 10, 30} x {3, 10, 30} with m = ceil(n/2).
// Per-problem failures produce flagged rows.
std::vector<ScatterRow> run_scatter(const SweepConfig& cfg);

struct CurvePoint {
  double sigma_a_scale = 0.0;
  double sigma_s_scale = 0.0;
  int iteration = 0;
  double eval_return_mean = 0.0;  // across runs alive at this checkpoint
  double eval_return_std = 0.0;
  double train_return_mean = 0.0;  // NaN at the pre-training checkpoint
  bool diverged = false;           // some run dropped out by this checkpoint
};

// Gradient-ascent learning curves: one random instance, initial gain
// perturbed to init_rho, then curve_runs independent training runs per
// (sigma_a scale from grid) x (sigma_s scale from scale_set) cell, sharing
// one fixed evaluation-state set.
std::vector<CurvePoint> run_learning_curves(const SweepConfig& cfg);

// CSV writers. First line is a schema comment
// "# lqrlab-csv v1 kind=<sweep|scatter|curves> experiment=<name>", then a
// column-header row, then data rows with 17-significant-digit numbers and
// booleans as 0/1. Output bytes depend only on the row values.
void write_sweep_csv(std::ostream& os, ExperimentKind kind,
                     const std::vector<SweepRow>& rows);
void write_scatter_csv(std::ostream& os, const std::vector<ScatterRow>& rows);
void write_curves_csv(std::ostream& os, const std::vector<CurvePoint>& rows);

// Number of rows a CLI exit status should consider problematic.
std::int64_t count_flagged(const std::vector<SweepRow>& rows);
std::int64_t count_flagged(const std::vector<ScatterRow>& rows);
std::int64_t count_flagged(const std::vector<CurvePoint>& rows);

}  // namespace lqrlab
