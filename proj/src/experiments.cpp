#include "lqrlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "lqrlab/bounds.hpp"
#include "lqrlab/ctrlmath.hpp"
#include "lqrlab/parallel.hpp"
#include "lqrlab/pg.hpp"
#include "lqrlab/serialize.hpp"

namespace lqrlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_common(const SweepConfig& cfg, bool needs_grid) {
  if (needs_grid) {
    if (cfg.grid.empty()) {
      throw std::invalid_argument("experiment: sweep grid is empty");
    }
    for (const double v : cfg.grid) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("experiment: sweep grid has a "
                                    "non-finite value");
      }
    }
  }
  if (cfg.scale_set.empty()) {
    throw std::invalid_argument("experiment: scale set is empty");
  }
  for (const double s : cfg.scale_set) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument(
          "experiment: scale values must be positive and finite");
    }
  }
  if (cfg.num_s1 < 1) {
    throw std::invalid_argument("experiment: num_s1 must be >= 1");
  }
  if (cfg.num_traj < 2) {
    throw std::invalid_argument("experiment: num_traj must be >= 2");
  }
}

std::vector<double> sorted_ascending(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Initial-state replicates s1 ~ N(0, n^{-1} I), one substream each.
std::vector<Vec> make_s1_set(std::uint64_t seed, Eigen::Index n, int count) {
  std::vector<Vec> states(static_cast<std::size_t>(count));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t e = 0; e < states.size(); ++e) {
    NormalStream stream(RngKey{seed, StreamContext::kInitState, e, 0});
    states[e] = scale * stream.next_vector(n);
  }
  return states;
}

struct PointStats {
  double bound_mean = kNaN;
  double nu_mean = kNaN;
  double sm_mean = kNaN;
  double nu_se = kNaN;
  double sm_se = kNaN;
  bool flagged = false;
};

// Averages the analytic bound and the Monte-Carlo estimator moments over
// the initial-state replicates. Replicate e uses trajectory streams keyed by
// (seed, kRollout, e, i); the same keys are deliberately reused across sweep
// points (common random numbers), which smooths comparisons along the grid
// without biasing any individual estimate.
PointStats evaluate_point(const LqrProblem& p, const GaussianPolicy& pol,
                          const std::vector<Vec>& s1s, int num_traj,
                          const TransientBound& transient,
                          std::uint64_t seed) {
  const std::int64_t count = static_cast<std::int64_t>(s1s.size());
  std::vector<double> bounds(s1s.size());
  std::vector<double> nus(s1s.size());
  std::vector<double> sms(s1s.size());
  std::vector<double> nu_vars(s1s.size());
  std::vector<double> sm_vars(s1s.size());
  parallel_for(count, [&](std::int64_t e) {
    const auto eu = static_cast<std::size_t>(e);
    const VarianceEstimate est = estimate_moments(
        p, pol, s1s[eu], num_traj,
        RngKey{seed, StreamContext::kRollout, static_cast<std::uint64_t>(e),
               0});
    bounds[eu] = upper_bound(p, pol, s1s[eu], transient).bound;
    nus[eu] = est.nu_hat;
    sms[eu] = est.second_moment_hat;
    nu_vars[eu] = est.std_error_nu * est.std_error_nu;
    sm_vars[eu] = est.std_error_second_moment * est.std_error_second_moment;
  });

  auto mean_of = [count](const std::vector<double>& v) {
    return pairwise_sum<double>(0, count,
                                [&](std::int64_t i) {
                                  return v[static_cast<std::size_t>(i)];
                                }) /
           static_cast<double>(count);
  };
  PointStats stats;
  stats.bound_mean = mean_of(bounds);
  stats.nu_mean = mean_of(nus);
  stats.sm_mean = mean_of(sms);
  // Replicates use disjoint streams, so variances of the per-replicate means
  // add; the mean's standard error is sqrt(sum var) / count.
  stats.nu_se = std::sqrt(pairwise_sum<double>(
                    0, count,
                    [&](std::int64_t i) {
                      return nu_vars[static_cast<std::size_t>(i)];
                    })) /
                static_cast<double>(count);
  stats.sm_se = std::sqrt(pairwise_sum<double>(
                    0, count,
                    [&](std::int64_t i) {
                      return sm_vars[static_cast<std::size_t>(i)];
                    })) /
                static_cast<double>(count);
  stats.flagged = !(std::isfinite(stats.bound_mean) &&
                    std::isfinite(stats.nu_mean) &&
                    std::isfinite(stats.sm_mean) &&
                    std::isfinite(stats.nu_se) && std::isfinite(stats.sm_se));
  return stats;
}

SweepRow flagged_row(double sweep_value, double scale) {
  SweepRow row;
  row.sweep_value = sweep_value;
  row.scale = scale;
  row.bound_mean = kNaN;
  row.empirical_nu_mean = kNaN;
  row.empirical_second_moment_mean = kNaN;
  row.nu_std_error = kNaN;
  row.rho_achieved = kNaN;
  row.sm_std_error = kNaN;
  row.flagged = true;
  return row;
}

SweepRow stats_row(double sweep_value, double scale, const PointStats& stats,
                   double rho_achieved) {
  SweepRow row;
  row.sweep_value = sweep_value;
  row.scale = scale;
  row.bound_mean = stats.bound_mean;
  row.empirical_nu_mean = stats.nu_mean;
  row.empirical_second_moment_mean = stats.sm_mean;
  row.nu_std_error = stats.nu_se;
  row.rho_achieved = rho_achieved;
  row.sm_std_error = stats.sm_se;
  row.flagged = stats.flagged;
  return row;
}

TransientBound closed_loop_transient(const LqrProblem& p, const Mat& gain) {
  TransientOptions opts;
  opts.allow_degenerate = true;
  opts.with_resolvent = false;  // diagnostic only; too costly inside sweeps
  return transient_bound_mu(p.a + p.b * gain, p.horizon, opts);
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kSigmaA:
      return "sigma_a";
    case ExperimentKind::kBMag:
      return "b_mag";
    case ExperimentKind::kRho:
      return "rho";
    case ExperimentKind::kScatter:
      return "scatter";
    case ExperimentKind::kCurves:
      return "curves";
  }
  return "unknown";
}

ExperimentKind experiment_from_string(const std::string& name) {
  if (name == "sigma_a") return ExperimentKind::kSigmaA;
  if (name == "b_mag") return ExperimentKind::kBMag;
  if (name == "rho") return ExperimentKind::kRho;
  if (name == "scatter") return ExperimentKind::kScatter;
  if (name == "curves") return ExperimentKind::kCurves;
  throw std::invalid_argument("unknown experiment '" + name +
                              "' (expected sigma_a, b_mag, rho, scatter or "
                              "curves)");
}

std::vector<SweepRow> run_sigma_a_sweep(const SweepConfig& cfg) {
  check_common(cfg, /*needs_grid=*/true);
  for (const double v : cfg.grid) {
    if (!(v > 0.0)) {
      throw std::invalid_argument(
          "sigma_a sweep: grid values must be positive covariance scales");
    }
  }
  const auto [base, base_pol] = random_lqr(cfg.recipe);
  const Mat gain = base_pol.k;  // Riccati-optimal; fixed across the sweep
  const TransientBound transient = closed_loop_transient(base, gain);
  const double rho_achieved = spectral_radius(base.a + base.b * gain);
  const std::vector<Vec> s1s =
      make_s1_set(cfg.recipe.seed, base.n(), cfg.num_s1);

  std::vector<SweepRow> rows;
  rows.reserve(cfg.scale_set.size() * cfg.grid.size());
  for (const double scale : sorted_ascending(cfg.scale_set)) {
    LqrProblem p = base;
    p.sigma_s = scale * base.sigma_s;
    for (const double v : sorted_ascending(cfg.grid)) {
      GaussianPolicy pol{gain, v * Mat::Identity(base.m(), base.m())};
      const PointStats stats = evaluate_point(p, pol, s1s, cfg.num_traj,
                                              transient, cfg.recipe.seed);
      rows.push_back(stats_row(v, scale, stats, rho_achieved));
    }
  }
  return rows;
}

std::vector<SweepRow> run_bmag_sweep(const SweepConfig& cfg) {
  check_common(cfg, /*needs_grid=*/true);
  if (cfg.recipe.m != cfg.recipe.n) {
    throw std::invalid_argument(
        "b_mag sweep: requires m == n so that b = v I is square");
  }
  for (const double v : cfg.grid) {
    if (!(v > 0.0)) {
      throw std::invalid_argument(
          "b_mag sweep: grid values must be positive input magnitudes");
    }
  }
  const auto [base, base_pol] = random_lqr(cfg.recipe);
  const std::vector<Vec> s1s =
      make_s1_set(cfg.recipe.seed, base.n(), cfg.num_s1);

  // Per grid value: input map, re-optimized gain and transient certificate.
  struct GridPoint {
    double value = 0.0;
    bool ok = false;
    Mat b, gain;
    TransientBound transient;
    double rho_achieved = kNaN;
  };
  const std::vector<double> grid = sorted_ascending(cfg.grid);
  std::vector<GridPoint> points(grid.size());
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    GridPoint& pt = points[gi];
    pt.value = grid[gi];
    pt.b = grid[gi] * Mat::Identity(base.n(), base.n());
    try {
      LqrProblem p = base;
      p.b = pt.b;
      pt.gain = solve_dare(p.a, p.b, p.q, p.r).k_star;
      pt.transient = closed_loop_transient(p, pt.gain);
      pt.rho_achieved = spectral_radius(p.a + p.b * pt.gain);
      pt.ok = true;
    } catch (const std::exception&) {
      pt.ok = false;  // row stays flagged; the sweep carries on
    }
  }

  std::vector<SweepRow> rows;
  rows.reserve(cfg.scale_set.size() * grid.size());
  for (const double scale : sorted_ascending(cfg.scale_set)) {
    for (const GridPoint& pt : points) {
      if (!pt.ok) {
        rows.push_back(flagged_row(pt.value, scale));
        continue;
      }
      LqrProblem p = base;
      p.b = pt.b;
      p.sigma_s = scale * base.sigma_s;
      GaussianPolicy pol{pt.gain, scale * base_pol.sigma_a};
      const PointStats stats = evaluate_point(p, pol, s1s, cfg.num_traj,
                                              pt.transient, cfg.recipe.seed);
      rows.push_back(stats_row(pt.value, scale, stats, pt.rho_achieved));
    }
  }
  return rows;
}

std::vector<SweepRow> run_rho_sweep(const SweepConfig& cfg) {
  check_common(cfg, /*needs_grid=*/true);
  for (const double v : cfg.grid) {
    if (!(v > 0.0) || !(v < 1.0)) {
      throw std::invalid_argument(
          "rho sweep: grid values must be target radii in (0, 1)");
    }
  }
  const auto [base, base_pol] = random_lqr(cfg.recipe);
  const std::vector<Vec> s1s =
      make_s1_set(cfg.recipe.seed, base.n(), cfg.num_s1);

  // One prototype spectrum, rescaled so its largest modulus matches each
  // requested radius exactly; pole placement then realizes it in the gain.
  const EigPrototype proto = eig_prototype(
      cfg.recipe.n, RngKey{cfg.recipe.seed, StreamContext::kPrototype, 0, 0});
  double max_modulus = 0.0;
  for (const auto& lambda : proto.lambdas) {
    max_modulus = std::max(max_modulus, std::abs(lambda));
  }
  if (max_modulus == 0.0) {
    throw std::runtime_error(
        "rho sweep: degenerate all-zero eigenvalue prototype");
  }

  struct GridPoint {
    double value = 0.0;
    bool ok = false;
    Mat gain;
    TransientBound transient;
    double rho_achieved = kNaN;
  };
  const std::vector<double> grid = sorted_ascending(cfg.grid);
  std::vector<GridPoint> points(grid.size());
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    GridPoint& pt = points[gi];
    pt.value = grid[gi];
    try {
      const auto target = scale_prototype(proto, grid[gi] / max_modulus);
      pt.gain = place_poles(base.a, base.b, target);
      pt.transient = closed_loop_transient(base, pt.gain);
      pt.rho_achieved = spectral_radius(base.a + base.b * pt.gain);
      pt.ok = true;
    } catch (const std::exception&) {
      pt.ok = false;
    }
  }

  std::vector<SweepRow> rows;
  rows.reserve(cfg.scale_set.size() * grid.size());
  for (const double scale : sorted_ascending(cfg.scale_set)) {
    for (const GridPoint& pt : points) {
      if (!pt.ok) {
        rows.push_back(flagged_row(pt.value, scale));
        continue;
      }
      LqrProblem p = base;
      p.sigma_s = scale * base.sigma_s;
      GaussianPolicy pol{pt.gain, scale * base_pol.sigma_a};
      const PointStats stats = evaluate_point(p, pol, s1s, cfg.num_traj,
                                              pt.transient, cfg.recipe.seed);
      rows.push_back(stats_row(pt.value, scale, stats, pt.rho_achieved));
    }
  }
  return rows;
}

std::vector<ScatterRow> run_scatter(const SweepConfig& cfg) {
  check_common(cfg, /*needs_grid=*/false);
  if (cfg.num_problems < 1) {
    throw std::invalid_argument("scatter: num_problems must be >= 1");
  }
  constexpr int kSizes[3] = {3, 10, 30};
  std::vector<ScatterRow> rows(static_cast<std::size_t>(cfg.num_problems));
  parallel_for(cfg.num_problems, [&](std::int64_t i) {
    const int n = kSizes[(i / 3) % 3];
    const int horizon = kSizes[i % 3];
    ScatterRow& row = rows[static_cast<std::size_t>(i)];
    row.n = n;
    row.m = (n + 1) / 2;
    row.horizon = horizon;
    try {
      ProblemRecipe recipe;
      recipe.n = n;
      recipe.m = row.m;
      recipe.horizon = horizon;
      recipe.sigma_s_scale = cfg.recipe.sigma_s_scale;
      recipe.sigma_a_scale = cfg.recipe.sigma_a_scale;
      recipe.seed = derive_seed(cfg.recipe.seed,
                                static_cast<std::uint64_t>(i));
      const auto [p, pol] = random_lqr(recipe);
      const TransientBound transient = closed_loop_transient(p, pol.k);
      const std::vector<Vec> s1s = make_s1_set(recipe.seed, p.n(), cfg.num_s1);
      const PointStats stats = evaluate_point(p, pol, s1s, cfg.num_traj,
                                              transient, recipe.seed);
      row.empirical_second_moment_mean = stats.sm_mean;
      row.sm_std_error = stats.sm_se;
      row.empirical_nu_mean = stats.nu_mean;
      row.bound_mean = stats.bound_mean;
      row.flagged = stats.flagged;
    } catch (const std::exception&) {
      row.empirical_second_moment_mean = kNaN;
      row.sm_std_error = kNaN;
      row.empirical_nu_mean = kNaN;
      row.bound_mean = kNaN;
      row.flagged = true;
    }
  });
  return rows;
}

std::vector<CurvePoint> run_learning_curves(const SweepConfig& cfg) {
  check_common(cfg, /*needs_grid=*/true);
  for (const double v : cfg.grid) {
    if (!(v > 0.0)) {
      throw std::invalid_argument(
          "curves: grid values must be positive sigma_a scales");
    }
  }
  if (cfg.curve_runs < 1 || cfg.curve_iters < 1 || cfg.eval_every < 1 ||
      cfg.num_eval_states < 1 || cfg.batch < 1) {
    throw std::invalid_argument(
        "curves: runs, iters, eval_every, num_eval_states and batch must "
        "all be >= 1");
  }
  if (!(cfg.step_size >= 0.0)) {
    throw std::invalid_argument("curves: step_size must be >= 0");
  }
  if (!(cfg.init_rho > 0.0) || !(cfg.init_rho < 1.0)) {
    throw std::invalid_argument("curves: init_rho must lie in (0, 1)");
  }
  const auto [base, base_pol] = random_lqr(cfg.recipe);
  // One perturbed starting gain, shared by every run and noise setting.
  const Mat k0 = perturb_to_radius(
      base, base_pol.k, cfg.init_rho,
      RngKey{cfg.recipe.seed, StreamContext::kPerturbation, 0, 0});

  std::vector<CurvePoint> rows;
  for (const double sa : sorted_ascending(cfg.grid)) {
    for (const double ss : sorted_ascending(cfg.scale_set)) {
      LqrProblem p = base;
      p.sigma_s = ss * base.sigma_s;
      GaussianPolicy pol0{k0, sa * Mat::Identity(base.m(), base.m())};

      std::vector<LearningCurve> curves(
          static_cast<std::size_t>(cfg.curve_runs));
      parallel_for(cfg.curve_runs, [&](std::int64_t run) {
        TrainOptions opts;
        opts.steps = cfg.curve_iters;
        opts.step_size = cfg.step_size;
        opts.batch = cfg.batch;
        opts.eval_every = cfg.eval_every;
        opts.num_eval_states = cfg.num_eval_states;
        opts.eval_seed = cfg.recipe.seed;  // one eval set for all runs
        curves[static_cast<std::size_t>(run)] = train_reinforce(
            p, pol0, opts,
            RngKey{derive_seed(cfg.recipe.seed,
                               0x5EEDu + static_cast<std::uint64_t>(run)),
                   StreamContext::kRollout, 0, 0});
      });

      // Aggregate runs checkpoint by checkpoint; runs that diverged early
      // simply stop contributing, which marks the row as diverged.
      std::size_t max_len = 0;
      for (const auto& c : curves) {
        max_len = std::max(max_len, c.iterations.size());
      }
      for (std::size_t ci = 0; ci < max_len; ++ci) {
        int iteration = -1;
        int alive = 0;
        double eval_sum = 0.0;
        double train_sum = 0.0;
        for (const auto& c : curves) {
          if (ci >= c.iterations.size()) continue;
          iteration = c.iterations[ci];
          ++alive;
          eval_sum += c.eval_returns[ci];
          train_sum += c.train_returns[ci];
        }
        CurvePoint point;
        point.sigma_a_scale = sa;
        point.sigma_s_scale = ss;
        point.iteration = iteration;
        point.eval_return_mean = eval_sum / alive;
        point.train_return_mean = train_sum / alive;
        double sq = 0.0;
        for (const auto& c : curves) {
          if (ci >= c.iterations.size()) continue;
          const double d = c.eval_returns[ci] - point.eval_return_mean;
          sq += d * d;
        }
        point.eval_return_std =
            alive > 1 ? std::sqrt(sq / (alive - 1)) : 0.0;
        point.diverged = alive < cfg.curve_runs;
        rows.push_back(point);
      }
    }
  }
  return rows;
}

namespace {

void write_bool(std::ostream& os, bool b) { os << (b ? '1' : '0'); }

}  // namespace

void write_sweep_csv(std::ostream& os, ExperimentKind kind,
                     const std::vector<SweepRow>& rows) {
  os << "# lqrlab-csv v1 kind=sweep experiment=" << to_string(kind) << '\n';
  os << "sweep_value,scale,bound_mean,empirical_nu_mean,"
        "empirical_second_moment_mean,nu_std_error,rho_achieved,"
        "sm_std_error,flagged\n";
  for (const auto& r : rows) {
    os << format_double(r.sweep_value) << ',' << format_double(r.scale) << ','
       << format_double(r.bound_mean) << ','
       << format_double(r.empirical_nu_mean) << ','
       << format_double(r.empirical_second_moment_mean) << ','
       << format_double(r.nu_std_error) << ','
       << format_double(r.rho_achieved) << ','
       << format_double(r.sm_std_error) << ',';
    write_bool(os, r.flagged);
    os << '\n';
  }
}

void write_scatter_csv(std::ostream& os, const std::vector<ScatterRow>& rows) {
  os << "# lqrlab-csv v1 kind=scatter experiment=scatter\n";
  os << "n,m,horizon,empirical_second_moment_mean,sm_std_error,"
        "empirical_nu_mean,bound_mean,flagged\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.m << ',' << r.horizon << ','
       << format_double(r.empirical_second_moment_mean) << ','
       << format_double(r.sm_std_error) << ','
       << format_double(r.empirical_nu_mean) << ','
       << format_double(r.bound_mean) << ',';
    write_bool(os, r.flagged);
    os << '\n';
  }
}

void write_curves_csv(std::ostream& os, const std::vector<CurvePoint>& rows) {
  os << "# lqrlab-csv v1 kind=curves experiment=curves\n";
  os << "sigma_a_scale,sigma_s_scale,iteration,eval_return_mean,"
        "eval_return_std,train_return_mean,diverged\n";
  for (const auto& r : rows) {
    os << format_double(r.sigma_a_scale) << ','
       << format_double(r.sigma_s_scale) << ',' << r.iteration << ','
       << format_double(r.eval_return_mean) << ','
       << format_double(r.eval_return_std) << ','
       << format_double(r.train_return_mean) << ',';
    write_bool(os, r.diverged);
    os << '\n';
  }
}

std::int64_t count_flagged(const std::vector<SweepRow>& rows) {
  return std::count_if(rows.begin(), rows.end(),
                       [](const SweepRow& r) { return r.flagged; });
}

std::int64_t count_flagged(const std::vector<ScatterRow>& rows) {
  return std::count_if(rows.begin(), rows.end(),
                       [](const ScatterRow& r) { return r.flagged; });
}

std::int64_t count_flagged(const std::vector<CurvePoint>& rows) {
  return std::count_if(rows.begin(), rows.end(),
                       [](const CurvePoint& r) { return r.diverged; });
}

}  // namespace lqrlab
