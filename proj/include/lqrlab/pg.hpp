#pragma once

#include <cstdint>
#include <vector>

#include "lqrlab/model.hpp"
#include "lqrlab/rng.hpp"
#include "lqrlab/rollout.hpp"
#include "lqrlab/types.hpp"

namespace lqrlab {

// Score-function gradient sample from one episode:
//   g_hat = ( sum_t sigma_a^{-1} eps_a_t s_t^T ) * total_return,  (m x n)
// an unbiased estimate of the policy gradient of the expected return with
// respect to the gain.
struct GradSample {
  Mat g_hat;
  double total_return = 0.0;
  Mat score_sum;  // sum_t sigma_a^{-1} eps_a_t s_t^T, before the return factor
};

GradSample reinforce_grad(const Trajectory& traj, const GaussianPolicy& pol);

// Monte-Carlo first/second moments of the gradient estimator over
// independent trajectories from one initial state.
struct VarianceEstimate {
  Mat mean_g;                      // gbar = (1/n) sum g_i
  double nu_hat = 0.0;             // (1/(n-1)) sum ||g_i - gbar||_F^2
  double second_moment_hat = 0.0;  // (1/n) sum ||g_i||_F^2
  std::int64_t n_samples = 0;
  double std_error_nu = 0.0;  // sample std of ||g_i - gbar||_F^2 over sqrt(n)
  double std_error_second_moment = 0.0;  // same for ||g_i||_F^2
};

// Runs n_traj rollouts keyed by key.with_trajectory(i) and aggregates the
// estimator moments. Deterministic for fixed key and n_traj regardless of
// thread count. Requires n_traj >= 2.
VarianceEstimate estimate_moments(const LqrProblem& p,
                                  const GaussianPolicy& pol, const Vec& s1,
                                  std::int64_t n_traj, const RngKey& key);

// Central finite differences of the exact expected return in each gain
// entry: (J(k + delta e_ij) - J(k - delta e_ij)) / (2 delta).
Mat finite_diff_grad(const LqrProblem& p, const GaussianPolicy& pol,
                     const Vec& s1, double delta);

struct LearningCurve {
  std::vector<int> iterations;        // checkpoint iteration numbers
  std::vector<double> eval_returns;   // mean noise-free return on the eval set
  std::vector<double> train_returns;  // mean batch return at the checkpoint
                                      // (NaN for the pre-training checkpoint)
  std::vector<Mat> k_snapshots;       // filled when record_snapshots is set
  bool diverged = false;
  Mat final_k;
};

struct TrainOptions {
  int steps = 100;
  double step_size = 1e-4;
  int batch = 1;
  int eval_every = 10;
  int num_eval_states = 100;
  bool record_snapshots = false;
  // Seed for the fixed evaluation-state set. Defaults (when UINT64_MAX) to
  // the training key's seed; override it to share one evaluation set across
  // runs that train with different seeds.
  std::uint64_t eval_seed = UINT64_MAX;
};

// Plain REINFORCE ascent on the gain: each iteration draws `batch` episodes
// from fresh initial states s1 ~ N(0, n^{-1} I), averages their gradient
// samples and takes one ascent step. Evaluation checkpoints (iteration 0 and
// every eval_every-th iteration, plus the final one) average the noise-free
// return over a fixed set of evaluation states. Training stops early and the
// curve is flagged when the gain diverges (||k|| > 1e6 or the closed loop's
// spectral radius exceeds 10). The seed only drives the noise and
// initial-state draws; everything else is deterministic.
LearningCurve train_reinforce(const LqrProblem& p, const GaussianPolicy& pol0,
                              const TrainOptions& opts, const RngKey& key);

// Scales a random direction until the closed-loop spectral radius of
// k_star + c * delta hits target_rho (bisection to |rho - target| <= 1e-4,
// at most 200 halvings). Requires rho(a + b k_star) < target_rho < 1.
Mat perturb_to_radius(const LqrProblem& p, const Mat& k_star,
                      double target_rho, const RngKey& key);

}  // namespace lqrlab
