#pragma once

#include "lqrlab/ctrlmath.hpp"
#include "lqrlab/model.hpp"
#include "lqrlab/types.hpp"

namespace lqrlab {

// Operator norms entering the bound, kept for inspection.
struct BoundNorms {
  double q = 0.0;            // ||Q||
  double r = 0.0;            // ||R||
  double k = 0.0;            // ||K||
  double b = 0.0;            // ||B||
  double sigma_s = 0.0;      // ||Sigma_s^{1/2}||
  double sigma_a = 0.0;      // ||Sigma_a^{1/2}||
  double inv_sigma_a = 0.0;  // ||Sigma_a^{-1}||
};

// Analytic upper bound on the summed second moment E[tr(g_hat^T g_hat)] of
// the score-function gradient estimator:
//
//   p_bar = 4 ||Sigma_a^{-1}|| mu^2 H'^2
//           ( r sigma_a^2 H + mu^2 (q + 2 r k^2)(H' ||s1||^2
//             + sigma^2 H H'^2) )^2  (||s1|| + sigma H)^2,
//   bound = p_bar * n_bar (n_bar+2)(n_bar+4)(n_bar+6),
//
// with sigma = sigma_s + ||B|| sigma_a, H' = min{H, 1/(1 - rho(A+BK))},
// n_bar = max{n, m}, and mu the certified transient constant of the closed
// loop. Since the bound dominates the second moment, it also dominates the
// summed variance.
struct UpperBoundReport {
  double bound = 0.0;          // p_bar * moment_factor
  double p_bar = 0.0;          // coefficient-sum bound before moment scaling
  double moment_factor = 0.0;  // n_bar (n_bar+2)(n_bar+4)(n_bar+6)
  double mu = 1.0;             // transient constant of a + b k over k <= H
  double rho = 0.0;            // spectral radius of a + b k
  double h_prime = 0.0;        // effective horizon H'
  double sigma = 0.0;          // combined noise scale
  double c1 = 0.0;  // mu^2 ||Sigma_a^{-1/2}|| (||s1|| + sigma H) H'
  double c2 = 0.0;  // r sigma_a^2 H + mu^2 (q + r k^2)(||s1||^2 + sigma^2 H) H'^2
  BoundNorms norms;
  int n_bar = 0;
};

// Computes the report. Requires a valid problem/policy with strictly stable
// closed loop (rho(a + b k) < 1); throws std::invalid_argument otherwise.
// The three-argument overload certifies the transient constant internally;
// the four-argument one reuses a TransientBound already computed for
// a + b k with k_max >= horizon (hot path for sweeps over many s1).
UpperBoundReport upper_bound(const LqrProblem& p, const GaussianPolicy& pol,
                             const Vec& s1);
UpperBoundReport upper_bound(const LqrProblem& p, const GaussianPolicy& pol,
                             const Vec& s1, const TransientBound& transient);

// Scalar lower bound on E[g_hat^2] at dimension one:
//   c1 = (1/sigma_a)(|s1| + sigma sqrt(H)) sqrt(h'),
//   c2 = r sigma_a^2 H + (q + r k^2)(s1^2 + sigma^2 H) h',
//   bound = c1^2 c2^2,
// with sigma = sigma_s + b sigma_a and h' = min{H, 1/(1 - (a + b k)^2)}.
// Here sigma_s / sigma_a are standard deviations, not variances. Requires
// 0 <= a + b k < 1, sigma_a > 0, horizon >= 1.
struct ScalarLowerBoundReport {
  double bound = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double h_prime = 0.0;      // the h' above
  double closed_loop = 0.0;  // a + b k
};

ScalarLowerBoundReport lower_bound_scalar(double a, double b, double k,
                                          double q, double r, double sigma_s,
                                          double sigma_a, double s1,
                                          int horizon);

}  // namespace lqrlab
