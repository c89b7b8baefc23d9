#pragma once

#include <iosfwd>
#include <vector>

#include "lqrlab/model.hpp"
#include "lqrlab/rng.hpp"
#include "lqrlab/types.hpp"

namespace lqrlab {

// One simulated episode. All containers have exactly `horizon` entries;
// states[t] is s_{t+1} in 1-based notation and the successor of the final
// state is never formed.
struct Trajectory {
  std::vector<Vec> states;
  std::vector<Vec> actions;
  std::vector<Vec> action_noise;  // the eps_a draw consumed by each action
  std::vector<double> rewards;
  double total_return = 0.0;
};

namespace detail {

// Shared recursion used by every rollout flavor, so stochastic and
// deterministic episodes execute bitwise-identical arithmetic. The noise
// callbacks are invoked in a fixed interleaved order: action noise for step
// t, then (only when a successor state exists) state noise for step t.
template <class ActionNoise, class StateNoise>
Trajectory rollout_core(const LqrProblem& p, const Mat& gain, const Vec& s1,
                        ActionNoise&& eps_a_of, StateNoise&& eps_s_of) {
  const int horizon = p.horizon;
  Trajectory traj;
  traj.states.reserve(horizon);
  traj.actions.reserve(horizon);
  traj.action_noise.reserve(horizon);
  traj.rewards.reserve(horizon);
  Vec s = s1;
  for (int t = 0; t < horizon; ++t) {
    Vec eps = eps_a_of(t);
    Vec action = gain * s + eps;
    const double reward =
        -(s.dot(p.q * s) + action.dot(p.r * action));
    traj.total_return += reward;
    traj.rewards.push_back(reward);
    if (t + 1 < horizon) {
      Vec next = p.a * s + p.b * action + eps_s_of(t);
      traj.states.push_back(std::move(s));
      s = std::move(next);
    } else {
      traj.states.push_back(std::move(s));
    }
    traj.actions.push_back(std::move(action));
    traj.action_noise.push_back(std::move(eps));
  }
  return traj;
}

}  // namespace detail

// Samples one episode under the policy. The key pins the noise stream:
// equal keys give bitwise-equal trajectories regardless of thread count or
// call order, and reusing a key with a different gain replays the same
// underlying noise (common random numbers). Validates inputs on every call;
// use rollout_with_roots in hot loops to hoist validation and the two
// covariance square roots.
Trajectory rollout(const LqrProblem& p, const GaussianPolicy& pol,
                   const Vec& s1, const RngKey& key);

// Same episode sampler with precomputed psd_sqrt(sigma_s) / psd_sqrt(sigma_a)
// factors and no validation. rollout() delegates here.
Trajectory rollout_with_roots(const LqrProblem& p, const Mat& gain,
                              const Mat& sigma_s_root, const Mat& sigma_a_root,
                              const Vec& s1, const RngKey& key);

// Noise-free episode (both covariances treated as zero); used for policy
// evaluation. Bitwise identical to a stochastic rollout whose noise draws
// are all exactly zero.
Trajectory rollout_deterministic(const LqrProblem& p, const Mat& gain,
                                 const Vec& s1);

// CSV dump: header then one row per step with columns
// t, s[0..n), a[0..m), eps_a[0..m), reward. Values use 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace lqrlab
