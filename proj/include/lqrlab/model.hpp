#pragma once

#include <string>
#include <vector>

#include "lqrlab/types.hpp"

namespace lqrlab {

// Linear dynamics s_{t+1} = a s_t + b a_t + eps_s with quadratic stage cost
// r_t = -(s_t^T q s_t + a_t^T r a_t), run for `horizon` steps from a fixed
// initial state. States s_1..s_H and actions a_1..a_H are realized; the
// successor of the final state is never formed.
struct LqrProblem {
  Mat a;        // n x n dynamics
  Mat b;        // n x m input map
  Mat q;        // n x n state cost, symmetric PSD
  Mat r;        // m x m action cost, symmetric PD
  Mat sigma_s;  // n x n process-noise covariance, symmetric PSD
  int horizon = 1;

  Eigen::Index n() const { return a.rows(); }
  Eigen::Index m() const { return b.cols(); }
};

// Linear-Gaussian policy a_t = k s_t + eps_a, eps_a ~ N(0, sigma_a).
struct GaussianPolicy {
  Mat k;        // m x n gain
  Mat sigma_a;  // m x m exploration covariance, symmetric PD
};

enum class ViolationCode {
  kNonFinite,
  kDimMismatch,
  kBadHorizon,
  kQNotPsd,
  kRNotPd,
  kSigmaSNotPsd,
  kSigmaANotPd,
};

// Stable machine-readable identifiers (e.g. "Q_NOT_PSD").
const char* to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string detail;
};

// Checks finiteness, dimensional consistency, horizon >= 1 and the
// definiteness requirements. Returns every violation found (empty means the
// pair is usable). Symmetry is accepted up to 1e-10 relative skew; PSD means
// min eigenvalue >= -1e-10 * ||.||, PD means min eigenvalue > 1e-12 * ||.||.
std::vector<Violation> validate(const LqrProblem& p, const GaussianPolicy& pol);

// Throws std::invalid_argument listing all violation codes if validate()
// reports any.
void require_valid(const LqrProblem& p, const GaussianPolicy& pol);

// Same, but accepts merely positive-semidefinite r and sigma_a. Simulation
// and the closed-form moments never invert either matrix, so the zero-cost
// and noise-free limits (r = 0, sigma_a = 0) are legal for them;
// score-function estimation and the Riccati solve are not covered.
void require_valid_for_simulation(const LqrProblem& p,
                                  const GaussianPolicy& pol);

struct MomentTrace {
  std::vector<Mat> second_moments;  // E[s_t s_t^T] for t = 1..horizon
  double expected_return = 0.0;
};

// Closed-form state second moments and expected return under the policy:
// with closed loop m = a + b k and injected covariance
// n = sigma_s + b sigma_a b^T,
//   S_1 = s1 s1^T,   S_{t+1} = m S_t m^T + n,
//   E[J] = -sum_t ( tr(q S_t) + tr(r (k S_t k^T + sigma_a)) ).
MomentTrace exact_moments(const LqrProblem& p, const GaussianPolicy& pol,
                          const Vec& s1);

// expected return only (same recursion without storing the moments).
double exact_return(const LqrProblem& p, const GaussianPolicy& pol,
                    const Vec& s1);

}  // namespace lqrlab
