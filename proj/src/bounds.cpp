#include "lqrlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lqrlab {

namespace {

// H' = min{H, 1/(1-f)} evaluated without forming 1/(1-f) when it would
// overflow for f -> 1 (the comparison is done first, in exact arithmetic).
double effective_horizon(int horizon, double f) {
  const double h = static_cast<double>(horizon);
  return (1.0 - f) * h >= 1.0 ? 1.0 / (1.0 - f) : h;
}

}  // namespace

UpperBoundReport upper_bound(const LqrProblem& p, const GaussianPolicy& pol,
                             const Vec& s1) {
  require_valid(p, pol);
  const Mat closed = p.a + p.b * pol.k;
  TransientOptions opts;
  opts.allow_degenerate = true;  // e.g. deadbeat closed loops
  opts.with_resolvent = false;   // the Kreiss scan is a separate diagnostic
  return upper_bound(p, pol, s1,
                     transient_bound_mu(closed, p.horizon, opts));
}

UpperBoundReport upper_bound(const LqrProblem& p, const GaussianPolicy& pol,
                             const Vec& s1, const TransientBound& transient) {
  require_valid(p, pol);
  if (s1.size() != p.n()) {
    throw std::invalid_argument("upper_bound: s1 has wrong dimension");
  }
  if (transient.k_max < p.horizon) {
    throw std::invalid_argument(
        "upper_bound: transient certificate covers fewer powers than the "
        "horizon");
  }
  const Mat closed = p.a + p.b * pol.k;
  const double f = spectral_radius(closed);
  if (f >= 1.0) {
    throw std::invalid_argument(
        "upper_bound: closed loop is not strictly stable (rho >= 1), the "
        "bound hypothesis is violated");
  }

  UpperBoundReport rep;
  rep.norms.q = operator_norm(p.q);
  rep.norms.r = operator_norm(p.r);
  rep.norms.k = operator_norm(pol.k);
  rep.norms.b = operator_norm(p.b);
  rep.norms.sigma_s = std::sqrt(operator_norm(p.sigma_s));
  rep.norms.sigma_a = std::sqrt(operator_norm(pol.sigma_a));
  const double lambda_min = min_symmetric_eigenvalue(pol.sigma_a);
  if (!(lambda_min > 0.0)) {
    throw std::invalid_argument("upper_bound: sigma_a is not invertible");
  }
  rep.norms.inv_sigma_a = 1.0 / lambda_min;

  rep.mu = transient.mu;
  rep.rho = f;
  rep.h_prime = effective_horizon(p.horizon, f);
  rep.sigma = rep.norms.sigma_s + rep.norms.b * rep.norms.sigma_a;
  rep.n_bar = static_cast<int>(std::max(p.n(), p.m()));

  const double h = static_cast<double>(p.horizon);
  const double hp = rep.h_prime;
  const double mu2 = rep.mu * rep.mu;
  const double s1_norm = s1.norm();
  const double sigma2 = rep.sigma * rep.sigma;
  const double var_a = rep.norms.sigma_a * rep.norms.sigma_a;  // ||Sigma_a||

  const double inner =
      rep.norms.r * var_a * h +
      mu2 * (rep.norms.q + 2.0 * rep.norms.r * rep.norms.k * rep.norms.k) *
          (hp * s1_norm * s1_norm + sigma2 * h * hp * hp);
  const double tail = s1_norm + rep.sigma * h;
  rep.p_bar = 4.0 * rep.norms.inv_sigma_a * mu2 * hp * hp * inner * inner *
              tail * tail;

  const double nb = static_cast<double>(rep.n_bar);
  rep.moment_factor = nb * (nb + 2.0) * (nb + 4.0) * (nb + 6.0);
  rep.bound = rep.p_bar * rep.moment_factor;

  // Constants as grouped in the headline statement of the bound; diagnostic.
  rep.c1 = mu2 * std::sqrt(rep.norms.inv_sigma_a) * tail * hp;
  rep.c2 = rep.norms.r * var_a * h +
           mu2 * (rep.norms.q + rep.norms.r * rep.norms.k * rep.norms.k) *
               (s1_norm * s1_norm + sigma2 * h) * hp * hp;
  return rep;
}

ScalarLowerBoundReport lower_bound_scalar(double a, double b, double k,
                                          double q, double r, double sigma_s,
                                          double sigma_a, double s1,
                                          int horizon) {
  if (horizon < 1) {
    throw std::invalid_argument("lower_bound_scalar: horizon must be >= 1");
  }
  if (!(sigma_a > 0.0)) {
    throw std::invalid_argument("lower_bound_scalar: sigma_a must be > 0");
  }
  if (sigma_s < 0.0) {
    throw std::invalid_argument("lower_bound_scalar: sigma_s must be >= 0");
  }
  if (q < 0.0 || r < 0.0) {
    throw std::invalid_argument("lower_bound_scalar: q and r must be >= 0");
  }
  const double closed = a + b * k;
  if (closed < 0.0 || closed >= 1.0) {
    throw std::invalid_argument(
        "lower_bound_scalar: requires 0 <= a + b k < 1");
  }

  ScalarLowerBoundReport rep;
  rep.closed_loop = closed;
  const double h = static_cast<double>(horizon);
  const double sigma = sigma_s + b * sigma_a;
  // h' = min{H, 1/(1-closed^2)}, comparison first to dodge overflow.
  const double contraction = 1.0 - closed * closed;
  rep.h_prime = contraction * h >= 1.0 ? 1.0 / contraction : h;
  rep.c1 = (std::abs(s1) + sigma * std::sqrt(h)) * std::sqrt(rep.h_prime) /
           sigma_a;
  rep.c2 = r * sigma_a * sigma_a * h +
           (q + r * k * k) * (s1 * s1 + sigma * sigma * h) * rep.h_prime;
  rep.bound = rep.c1 * rep.c1 * rep.c2 * rep.c2;
  return rep;
}

}  // namespace lqrlab
