#include "lqrlab/pg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "lqrlab/ctrlmath.hpp"
#include "lqrlab/parallel.hpp"

namespace lqrlab {

GradSample reinforce_grad(const Trajectory& traj, const GaussianPolicy& pol) {
  if (traj.states.empty()) {
    throw std::invalid_argument("reinforce_grad: empty trajectory");
  }
  const Eigen::Index m = pol.sigma_a.rows();
  const Eigen::Index n = traj.states.front().size();
  if (traj.action_noise.front().size() != m) {
    throw std::invalid_argument(
        "reinforce_grad: trajectory and policy dimensions disagree");
  }
  Eigen::LLT<Mat> llt(pol.sigma_a);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(
        "reinforce_grad: sigma_a is not positive definite");
  }
  GradSample sample;
  sample.score_sum = Mat::Zero(m, n);
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    sample.score_sum +=
        llt.solve(traj.action_noise[t]) * traj.states[t].transpose();
  }
  sample.total_return = traj.total_return;
  sample.g_hat = sample.score_sum * traj.total_return;
  return sample;
}

VarianceEstimate estimate_moments(const LqrProblem& p,
                                  const GaussianPolicy& pol, const Vec& s1,
                                  std::int64_t n_traj, const RngKey& key) {
  if (n_traj < 2) {
    throw std::invalid_argument("estimate_moments: need at least 2 samples");
  }
  require_valid(p, pol);
  if (s1.size() != p.n()) {
    throw std::invalid_argument("estimate_moments: s1 has wrong dimension");
  }
  const Mat sigma_s_root = psd_sqrt(p.sigma_s);
  const Mat sigma_a_root = psd_sqrt(pol.sigma_a);

  std::vector<Mat> grads(static_cast<std::size_t>(n_traj));
  parallel_for(n_traj, [&](std::int64_t i) {
    const Trajectory traj =
        rollout_with_roots(p, pol.k, sigma_s_root, sigma_a_root, s1,
                           key.with_trajectory(static_cast<std::uint64_t>(i)));
    grads[static_cast<std::size_t>(i)] = reinforce_grad(traj, pol).g_hat;
  });

  VarianceEstimate est;
  est.n_samples = n_traj;
  est.mean_g =
      pairwise_sum<Mat>(0, n_traj, [&](std::int64_t i) -> const Mat& {
        return grads[static_cast<std::size_t>(i)];
      }) /
      static_cast<double>(n_traj);

  // Per-sample squared deviations / magnitudes, then fixed-order reductions.
  std::vector<double> dev_sq(grads.size());
  std::vector<double> mag_sq(grads.size());
  for (std::size_t i = 0; i < grads.size(); ++i) {
    dev_sq[i] = (grads[i] - est.mean_g).squaredNorm();
    mag_sq[i] = grads[i].squaredNorm();
  }
  auto sum_of = [&](const std::vector<double>& v) {
    return pairwise_sum<double>(0, static_cast<std::int64_t>(v.size()),
                                [&](std::int64_t i) { return v[i]; });
  };
  const double nf = static_cast<double>(n_traj);
  est.nu_hat = sum_of(dev_sq) / (nf - 1.0);
  est.second_moment_hat = sum_of(mag_sq) / nf;

  auto std_error = [&](const std::vector<double>& v, double mean) {
    std::vector<double> centered(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double d = v[i] - mean;
      centered[i] = d * d;
    }
    return std::sqrt(sum_of(centered) / (nf - 1.0)) / std::sqrt(nf);
  };
  est.std_error_nu = std_error(dev_sq, sum_of(dev_sq) / nf);
  est.std_error_second_moment = std_error(mag_sq, est.second_moment_hat);
  return est;
}

Mat finite_diff_grad(const LqrProblem& p, const GaussianPolicy& pol,
                     const Vec& s1, double delta) {
  require_valid_for_simulation(p, pol);
  if (s1.size() != p.n()) {
    throw std::invalid_argument("finite_diff_grad: s1 has wrong dimension");
  }
  if (!(delta > 0.0)) {
    throw std::invalid_argument("finite_diff_grad: delta must be positive");
  }
  Mat grad(pol.k.rows(), pol.k.cols());
  GaussianPolicy probe = pol;
  for (Eigen::Index i = 0; i < pol.k.rows(); ++i) {
    for (Eigen::Index j = 0; j < pol.k.cols(); ++j) {
      probe.k = pol.k;
      probe.k(i, j) += delta;
      const double plus = exact_return(p, probe, s1);
      probe.k(i, j) = pol.k(i, j) - delta;
      const double minus = exact_return(p, probe, s1);
      grad(i, j) = (plus - minus) / (2.0 * delta);
    }
  }
  return grad;
}

LearningCurve train_reinforce(const LqrProblem& p, const GaussianPolicy& pol0,
                              const TrainOptions& opts, const RngKey& key) {
  require_valid(p, pol0);
  if (opts.steps < 1 || opts.batch < 1 || opts.eval_every < 1 ||
      opts.num_eval_states < 1) {
    throw std::invalid_argument(
        "train_reinforce: steps, batch, eval_every and num_eval_states must "
        "all be >= 1");
  }
  if (!(opts.step_size >= 0.0)) {
    throw std::invalid_argument("train_reinforce: step_size must be >= 0");
  }
  const Eigen::Index n = p.n();
  const Mat sigma_s_root = psd_sqrt(p.sigma_s);
  const Mat sigma_a_root = psd_sqrt(pol0.sigma_a);
  const double s1_scale = 1.0 / std::sqrt(static_cast<double>(n));

  // Fixed evaluation set, shared across runs that pass the same eval_seed.
  const std::uint64_t eval_seed =
      opts.eval_seed == UINT64_MAX ? key.seed : opts.eval_seed;
  std::vector<Vec> eval_states(static_cast<std::size_t>(opts.num_eval_states));
  for (std::size_t e = 0; e < eval_states.size(); ++e) {
    NormalStream stream(
        RngKey{eval_seed, StreamContext::kEvalState, e, 0});
    eval_states[e] = s1_scale * stream.next_vector(n);
  }

  LearningCurve curve;
  Mat gain = pol0.k;
  GaussianPolicy pol = pol0;

  auto eval_mean = [&](const Mat& k) {
    std::vector<double> returns(eval_states.size());
    parallel_for(static_cast<std::int64_t>(eval_states.size()),
                 [&](std::int64_t e) {
                   returns[static_cast<std::size_t>(e)] =
                       rollout_deterministic(p, k,
                                             eval_states[static_cast<
                                                 std::size_t>(e)])
                           .total_return;
                 });
    return pairwise_sum<double>(0, static_cast<std::int64_t>(returns.size()),
                                [&](std::int64_t i) { return returns[i]; }) /
           static_cast<double>(returns.size());
  };
  auto checkpoint = [&](int iteration, double train_mean) {
    curve.iterations.push_back(iteration);
    curve.eval_returns.push_back(eval_mean(gain));
    curve.train_returns.push_back(train_mean);
    if (opts.record_snapshots) curve.k_snapshots.push_back(gain);
  };

  checkpoint(0, std::numeric_limits<double>::quiet_NaN());

  std::vector<Mat> batch_grads(static_cast<std::size_t>(opts.batch));
  std::vector<double> batch_returns(static_cast<std::size_t>(opts.batch));
  for (int it = 1; it <= opts.steps; ++it) {
    pol.k = gain;
    parallel_for(opts.batch, [&](std::int64_t j) {
      const std::uint64_t episode =
          static_cast<std::uint64_t>(it - 1) *
              static_cast<std::uint64_t>(opts.batch) +
          static_cast<std::uint64_t>(j);
      NormalStream init_stream(
          RngKey{key.seed, StreamContext::kInitState, episode, 0});
      const Vec s1 = s1_scale * init_stream.next_vector(n);
      const Trajectory traj = rollout_with_roots(
          p, gain, sigma_s_root, sigma_a_root, s1,
          RngKey{key.seed, StreamContext::kRollout, episode, 0});
      batch_grads[static_cast<std::size_t>(j)] = reinforce_grad(traj, pol).g_hat;
      batch_returns[static_cast<std::size_t>(j)] = traj.total_return;
    });
    const Mat mean_grad =
        pairwise_sum<Mat>(0, opts.batch,
                          [&](std::int64_t j) -> const Mat& {
                            return batch_grads[static_cast<std::size_t>(j)];
                          }) /
        static_cast<double>(opts.batch);
    const double train_mean =
        pairwise_sum<double>(0, opts.batch,
                             [&](std::int64_t j) {
                               return batch_returns[static_cast<std::size_t>(
                                   j)];
                             }) /
        static_cast<double>(opts.batch);
    gain += opts.step_size * mean_grad;

    if (!gain.allFinite() || operator_norm(gain) > 1e6 ||
        spectral_radius(p.a + p.b * gain) > 10.0) {
      curve.diverged = true;
      break;  // curve is truncated at the last healthy checkpoint
    }
    if (it % opts.eval_every == 0 || it == opts.steps) {
      checkpoint(it, train_mean);
    }
  }
  curve.final_k = gain;
  return curve;
}

Mat perturb_to_radius(const LqrProblem& p, const Mat& k_star,
                      double target_rho, const RngKey& key) {
  if (k_star.rows() != p.m() || k_star.cols() != p.n()) {
    throw std::invalid_argument("perturb_to_radius: gain has wrong shape");
  }
  if (!(target_rho > 0.0) || !(target_rho < 1.0)) {
    throw std::invalid_argument(
        "perturb_to_radius: target_rho must lie in (0, 1)");
  }
  const double base_rho = spectral_radius(p.a + p.b * k_star);
  if (base_rho >= target_rho) {
    throw std::invalid_argument(
        "perturb_to_radius: target_rho must exceed the unperturbed "
        "closed-loop spectral radius");
  }
  Mat delta(p.m(), p.n());
  NormalStream stream(key);
  stream.fill(delta);

  constexpr double kTol = 1e-4;
  auto rho_at = [&](double c) {
    return spectral_radius(p.a + p.b * (k_star + c * delta));
  };

  // Bracket: rho(0) < target; grow c until the radius crosses the target.
  double lo = 0.0;
  double hi = 1.0;
  int growth = 0;
  while (rho_at(hi) < target_rho) {
    lo = hi;
    hi *= 2.0;
    if (++growth > 60) {
      throw std::runtime_error(
          "perturb_to_radius: direction cannot reach the target radius");
    }
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double rho = rho_at(mid);
    if (std::abs(rho - target_rho) <= kTol) return k_star + mid * delta;
    (rho < target_rho ? lo : hi) = mid;
  }
  throw std::runtime_error(
      "perturb_to_radius: bisection failed to localize the target radius "
      "(spectral radius may jump across it)");
}

}  // namespace lqrlab
