#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "lqrlab/types.hpp"

namespace lqrlab {

// Spectral radius rho(m) = max |lambda_i(m)|. Throws std::invalid_argument
// for non-square or empty input, std::runtime_error if the eigensolver fails.
double spectral_radius(const Mat& m);

// Operator (spectral) norm: largest singular value. Works for any non-empty
// rectangular matrix.
double operator_norm(const Mat& m);

// Smallest eigenvalue of the symmetric part (s + s^T) / 2. Helper for
// definiteness checks; throws std::invalid_argument for non-square input.
double min_symmetric_eigenvalue(const Mat& s);

// Symmetric positive semidefinite square root. Input must be symmetric up to
// a 1e-10 relative tolerance and have eigenvalues >= -1e-10 * ||s||;
// eigenvalues in [-tol, 0) are clamped to zero. Throws std::invalid_argument
// otherwise. The result x is symmetric and satisfies x * x ~= s.
Mat psd_sqrt(const Mat& s);

// Rank of the controllability matrix [b, a b, ..., a^{n-1} b], decided by
// singular values above 1e-10 * sigma_max.
int controllability_rank(const Mat& a, const Mat& b);

struct DareSolution {
  Mat p;                        // stabilizing cost-to-go matrix, n x n
  Mat k_star;                   // optimal gain for actions a = k s, m x n
  double residual = 0.0;        // operator norm of the fixed-point defect
  std::int64_t iterations = 0;  // value-iteration sweeps used
};

// Solves the discrete-time algebraic Riccati equation
//   p = q + a^T p a - a^T p b (r + b^T p b)^{-1} b^T p a
// by fixed-point iteration from p = q, stopping when the relative change
// falls below 1e-12 (capped at 1e6 sweeps). Requires q symmetric PSD,
// r symmetric PD, and (a, b) controllable; throws std::invalid_argument on
// bad inputs and std::runtime_error if the iteration fails to converge or
// the resulting closed loop a + b k_star is not strictly stable.
DareSolution solve_dare(const Mat& a, const Mat& b, const Mat& q, const Mat& r);

struct TransientBound {
  double mu = 1.0;   // certified constant: ||m^k|| <= mu * rho^k for k <= k_max
  double rho = 0.0;  // spectral radius used in the certificate
  int k_max = 0;     // largest certified power
  double resolvent_estimate = 0.0;  // grid estimate of the Kreiss constant
                                    // sup_{|z|>1} (|z|-1) ||(z i - m)^{-1}||;
                                    // diagnostic only, 0 when not computed
  bool degenerate = false;  // rho below 1e-12; mu is max_k ||m^k|| instead
};

struct TransientOptions {
  // Accept matrices with spectral radius below 1e-12 (e.g. nilpotent closed
  // loops). In that case rho is clamped to 1e-12 and mu falls back to the
  // largest raw power norm, which still dominates ||m^k|| for k <= k_max.
  bool allow_degenerate = false;
  // Fill resolvent_estimate via a default grid scan (costly for large n).
  bool with_resolvent = true;
};

// Computes the smallest mu with ||m^k|| <= mu * rho(m)^k over k = 0..k_max.
// Requires a square matrix with rho(m) < 1 and k_max >= 1. The ratio is
// evaluated in log space so tiny rho(m)^k cannot underflow to zero.
TransientBound transient_bound_mu(const Mat& m, int k_max,
                                  const TransientOptions& opts = {});

// Grid estimate of the Kreiss constant of a strictly stable matrix:
// max over z = radius * e^{i theta} of (|z| - 1) / sigma_min(z i - m),
// with angles theta sampled uniformly on [0, pi] (the spectrum of a real
// matrix is conjugate-symmetric). All radii must exceed 1.
double resolvent_condition(const Mat& m, const std::vector<double>& radii,
                           int angles_per_radius);

// Expands prod_i (x - lambda_i) into monic coefficients [1, c1, ..., cn].
// Non-real eigenvalues must come in exact conjugate pairs (bitwise equal
// mirrored components) so the result is exactly real.
std::vector<double> char_poly_from_eigs(
    const std::vector<std::complex<double>>& lambdas);

// Places the eigenvalues of a + b k at the requested self-conjugate set via
// Ackermann's formula on a randomized single-input reduction b v. Retries
// with fresh directions (up to 10) until the achieved spectrum matches the
// request to 1e-6 relative accuracy; throws std::invalid_argument if (a, b)
// is uncontrollable or the eigenvalue list is malformed, std::runtime_error
// if no attempt succeeds.
Mat place_poles(const Mat& a, const Mat& b,
                const std::vector<std::complex<double>>& lambdas);

}  // namespace lqrlab
