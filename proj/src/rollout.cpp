#include "lqrlab/rollout.hpp"

#include <ostream>
#include <stdexcept>

#include "lqrlab/ctrlmath.hpp"
#include "lqrlab/serialize.hpp"

namespace lqrlab {

Trajectory rollout_with_roots(const LqrProblem& p, const Mat& gain,
                              const Mat& sigma_s_root, const Mat& sigma_a_root,
                              const Vec& s1, const RngKey& key) {
  NormalStream stream(key);
  const Eigen::Index n = p.n();
  const Eigen::Index m = p.m();
  return detail::rollout_core(
      p, gain, s1,
      [&](int) -> Vec { return sigma_a_root * stream.next_vector(m); },
      [&](int) -> Vec { return sigma_s_root * stream.next_vector(n); });
}

Trajectory rollout(const LqrProblem& p, const GaussianPolicy& pol,
                   const Vec& s1, const RngKey& key) {
  require_valid_for_simulation(p, pol);
  if (s1.size() != p.n()) {
    throw std::invalid_argument("rollout: s1 has wrong dimension");
  }
  return rollout_with_roots(p, pol.k, psd_sqrt(p.sigma_s),
                            psd_sqrt(pol.sigma_a), s1, key);
}

Trajectory rollout_deterministic(const LqrProblem& p, const Mat& gain,
                                 const Vec& s1) {
  if (s1.size() != p.n() || gain.rows() != p.m() || gain.cols() != p.n()) {
    throw std::invalid_argument(
        "rollout_deterministic: dimension mismatch between problem, gain "
        "and s1");
  }
  const Vec zero_a = Vec::Zero(p.m());
  const Vec zero_s = Vec::Zero(p.n());
  return detail::rollout_core(
      p, gain, s1, [&](int) -> Vec { return zero_a; },
      [&](int) -> Vec { return zero_s; });
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  if (traj.states.empty()) {
    throw std::invalid_argument("write_trajectory_csv: empty trajectory");
  }
  const Eigen::Index n = traj.states.front().size();
  const Eigen::Index m = traj.actions.front().size();
  os << 't';
  for (Eigen::Index i = 0; i < n; ++i) os << ",s" << i;
  for (Eigen::Index i = 0; i < m; ++i) os << ",a" << i;
  for (Eigen::Index i = 0; i < m; ++i) os << ",eps_a" << i;
  os << ",reward\n";
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    os << (t + 1);  // steps are 1-based in the fileformat
    for (Eigen::Index i = 0; i < n; ++i) {
      os << ',' << format_double(traj.states[t](i));
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      os << ',' << format_double(traj.actions[t](i));
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      os << ',' << format_double(traj.action_noise[t](i));
    }
    os << ',' << format_double(traj.rewards[t]) << '\n';
  }
}

}  // namespace lqrlab
