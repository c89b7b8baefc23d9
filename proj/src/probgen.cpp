#include "lqrlab/probgen.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lqrlab/ctrlmath.hpp"

namespace lqrlab {

namespace {

// Component indices inside the problem-generation stream family.
enum Component : std::uint64_t {
  kDynA = 0,
  kInputB = 1,
  kCostQ = 2,
  kCostR = 3,
  kNoiseS = 4,
  kNoiseA = 5,
};

RngKey component_key(std::uint64_t seed, std::uint64_t component,
                     std::uint64_t attempt) {
  return RngKey{seed, StreamContext::kProblemGen, component, attempt};
}

Mat gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double stddev,
                    const RngKey& key) {
  Mat m(rows, cols);
  NormalStream stream(key);
  stream.fill(m);
  return stddev * m;
}

}  // namespace

Mat wishart_psd(int k, const RngKey& key) {
  if (k < 1) throw std::invalid_argument("wishart_psd: k must be >= 1");
  const Mat x =
      gaussian_matrix(k, k, 1.0 / std::sqrt(static_cast<double>(k)), key);
  Mat q = x.transpose() * x;
  return 0.5 * (q + q.transpose());
}

std::pair<LqrProblem, GaussianPolicy> random_lqr(const ProblemRecipe& recipe) {
  if (recipe.n < 1 || recipe.m < 1 || recipe.horizon < 1) {
    throw std::invalid_argument(
        "random_lqr: n, m and horizon must all be >= 1");
  }
  if (!(recipe.sigma_s_scale >= 0.0) || !(recipe.sigma_a_scale > 0.0)) {
    throw std::invalid_argument(
        "random_lqr: sigma_s_scale must be >= 0 and sigma_a_scale > 0");
  }
  const Eigen::Index n = recipe.n;
  const Eigen::Index m = recipe.m;

  LqrProblem p;
  p.horizon = recipe.horizon;
  p.q = wishart_psd(recipe.n, component_key(recipe.seed, kCostQ, 0));
  p.r = wishart_psd(recipe.m, component_key(recipe.seed, kCostR, 0));
  p.sigma_s = recipe.sigma_s_scale *
              wishart_psd(recipe.n, component_key(recipe.seed, kNoiseS, 0));
  GaussianPolicy pol;
  pol.sigma_a = recipe.sigma_a_scale *
                wishart_psd(recipe.m, component_key(recipe.seed, kNoiseA, 0));

  constexpr int kMaxAttempts = 5;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    p.a = gaussian_matrix(n, n, 1.0 / std::sqrt(static_cast<double>(n)),
                          component_key(recipe.seed, kDynA, attempt));
    p.b = gaussian_matrix(n, m, 1.0 / std::sqrt(static_cast<double>(m)),
                          component_key(recipe.seed, kInputB, attempt));
    if (controllability_rank(p.a, p.b) != recipe.n) continue;
    pol.k = solve_dare(p.a, p.b, p.q, p.r).k_star;
    return {p, pol};
  }
  throw std::runtime_error(
      "random_lqr: no controllable (a, b) pair in 5 attempts");
}

EigPrototype eig_prototype(int n, const RngKey& key) {
  if (n < 1) throw std::invalid_argument("eig_prototype: n must be >= 1");
  EigPrototype proto;
  proto.seed = key.seed;
  proto.lambdas.reserve(static_cast<std::size_t>(n));
  NormalStream stream(key);
  for (int pair = 0; pair < n / 2; ++pair) {
    const double radius = stream.next_uniform();
    const double phase = std::numbers::pi * stream.next_uniform();
    const double re = radius * std::cos(phase);
    const double im = radius * std::sin(phase);
    proto.lambdas.emplace_back(re, im);
    proto.lambdas.emplace_back(re, -im);  // exact conjugate, bitwise
  }
  if (n % 2 == 1) {
    proto.lambdas.emplace_back(2.0 * stream.next_uniform() - 1.0, 0.0);
  }
  return proto;
}

std::vector<std::complex<double>> scale_prototype(const EigPrototype& proto,
                                                  double factor) {
  if (!(factor >= 0.0)) {
    throw std::invalid_argument("scale_prototype: factor must be >= 0");
  }
  std::vector<std::complex<double>> out;
  out.reserve(proto.lambdas.size());
  for (const auto& lambda : proto.lambdas) {
    out.emplace_back(factor * lambda.real(), factor * lambda.imag());
  }
  return out;
}

}  // namespace lqrlab
