#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "lqrlab/model.hpp"
#include "lqrlab/rng.hpp"
#include "lqrlab/types.hpp"

namespace lqrlab {

// Blueprint for one random problem instance. The seed fully determines the
// outcome; scales multiply the sampled noise covariances.
struct ProblemRecipe {
  int n = 5;
  int m = 3;
  int horizon = 10;
  double sigma_s_scale = 1.0;
  double sigma_a_scale = 1.0;
  std::uint64_t seed = 0;
};

// Wishart-style random PSD matrix: x^T x for x a k x k matrix of iid
// N(0, 1/k) entries. Normalized so E[v^T q v] = 1 for v ~ N(0, k^{-1} I).
Mat wishart_psd(int k, const RngKey& key);

// Samples a problem with iid N(0, 1/n) dynamics entries, N(0, 1/m) input-map
// entries, Wishart costs and noise covariances, and the optimal gain from
// the Riccati solution as policy gain. Uncontrollable (a, b) draws are
// rejected and redrawn up to 5 times (costs and covariances are kept);
// throws std::runtime_error when all attempts fail.
std::pair<LqrProblem, GaussianPolicy> random_lqr(const ProblemRecipe& recipe);

// Self-conjugate eigenvalue set inside the closed unit disk:
// floor(n/2) conjugate pairs rho e^{+-i phi} with rho ~ U[0,1),
// phi ~ U[0, pi), plus one real eigenvalue ~ U[-1,1] when n is odd.
struct EigPrototype {
  std::vector<std::complex<double>> lambdas;
  std::uint64_t seed = 0;
};

EigPrototype eig_prototype(int n, const RngKey& key);

// Homogeneous rescaling of a prototype spectrum by a nonnegative factor;
// conjugate symmetry is preserved exactly.
std::vector<std::complex<double>> scale_prototype(const EigPrototype& proto,
                                                  double factor);

}  // namespace lqrlab
