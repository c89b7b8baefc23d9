#include "lqrlab/ctrlmath.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "lqrlab/rng.hpp"

namespace lqrlab {

namespace {

void require_square(const Mat& m, const char* who) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw std::invalid_argument(std::string(who) +
                                ": expected a non-empty square matrix");
  }
}

bool symmetric_within(const Mat& m, double rel_tol) {
  const double scale = operator_norm(m);
  const double skew = operator_norm(Mat(m - m.transpose()));
  return skew <= rel_tol * scale || skew == 0.0;
}

// Sorts a spectrum by (real, imag) so multisets can be compared elementwise.
void sort_spectrum(std::vector<std::complex<double>>& v) {
  std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
}

std::vector<std::complex<double>> eigenvalues_of(const Mat& m) {
  Eigen::EigenSolver<Mat> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigenvalue computation failed to converge");
  }
  const auto& vals = solver.eigenvalues();
  std::vector<std::complex<double>> out(vals.size());
  for (Eigen::Index i = 0; i < vals.size(); ++i) out[i] = vals(i);
  return out;
}

}  // namespace

double spectral_radius(const Mat& m) {
  require_square(m, "spectral_radius");
  double radius = 0.0;
  for (const auto& lambda : eigenvalues_of(m)) {
    radius = std::max(radius, std::abs(lambda));
  }
  return radius;
}

double operator_norm(const Mat& m) {
  if (m.size() == 0) {
    throw std::invalid_argument("operator_norm: empty matrix");
  }
  if (m.size() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double min_symmetric_eigenvalue(const Mat& s) {
  require_square(s, "min_symmetric_eigenvalue");
  const Mat sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric eigensolver failed to converge");
  }
  return solver.eigenvalues()(0);
}

Mat psd_sqrt(const Mat& s) {
  require_square(s, "psd_sqrt");
  if (!symmetric_within(s, 1e-10)) {
    throw std::invalid_argument("psd_sqrt: matrix is not symmetric");
  }
  const Mat sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("psd_sqrt: eigensolver failed to converge");
  }
  const double scale = std::abs(solver.eigenvalues().cwiseAbs().maxCoeff());
  Vec roots(solver.eigenvalues().size());
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    const double lambda = solver.eigenvalues()(i);
    if (lambda < -1e-10 * scale) {
      throw std::invalid_argument(
          "psd_sqrt: matrix has a significantly negative eigenvalue");
    }
    roots(i) = std::sqrt(std::max(lambda, 0.0));
  }
  const Mat root = solver.eigenvectors() * roots.asDiagonal() *
                   solver.eigenvectors().transpose();
  return 0.5 * (root + root.transpose());
}

int controllability_rank(const Mat& a, const Mat& b) {
  require_square(a, "controllability_rank");
  if (b.rows() != a.rows() || b.cols() == 0) {
    throw std::invalid_argument(
        "controllability_rank: b must have the same row count as a");
  }
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  Mat ctrb(n, n * m);
  Mat block = b;
  for (Eigen::Index k = 0; k < n; ++k) {
    ctrb.middleCols(k * m, m) = block;
    if (k + 1 < n) block = a * block;
  }
  Eigen::JacobiSVD<Mat> svd(ctrb);
  const auto& sigma = svd.singularValues();
  if (sigma.size() == 0 || sigma(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > 1e-10 * sigma(0)) ++rank;
  }
  return rank;
}

DareSolution solve_dare(const Mat& a, const Mat& b, const Mat& q,
                        const Mat& r) {
  require_square(a, "solve_dare");
  const Eigen::Index n = a.rows();
  if (b.rows() != n || b.cols() == 0) {
    throw std::invalid_argument("solve_dare: b has incompatible dimensions");
  }
  const Eigen::Index m = b.cols();
  if (q.rows() != n || q.cols() != n) {
    throw std::invalid_argument("solve_dare: q has incompatible dimensions");
  }
  if (r.rows() != m || r.cols() != m) {
    throw std::invalid_argument("solve_dare: r has incompatible dimensions");
  }
  if (!symmetric_within(q, 1e-10) ||
      min_symmetric_eigenvalue(q) < -1e-10 * operator_norm(q)) {
    throw std::invalid_argument("solve_dare: q is not symmetric PSD");
  }
  if (!symmetric_within(r, 1e-10) ||
      min_symmetric_eigenvalue(r) <= 1e-12 * operator_norm(r)) {
    throw std::invalid_argument("solve_dare: r is not symmetric PD");
  }
  if (controllability_rank(a, b) != static_cast<int>(n)) {
    throw std::invalid_argument("solve_dare: (a, b) is not controllable");
  }

  constexpr std::int64_t kMaxSweeps = 1'000'000;
  constexpr double kRelTol = 1e-12;
  Mat p = 0.5 * (q + q.transpose());
  std::int64_t sweeps = 0;
  for (; sweeps < kMaxSweeps; ++sweeps) {
    const Mat bpa = b.transpose() * p * a;      // m x n
    const Mat gram = r + b.transpose() * p * b;  // m x m, PD
    Eigen::LLT<Mat> llt(gram);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("solve_dare: inner Gram matrix lost "
                               "positive definiteness");
    }
    Mat next = q + a.transpose() * p * a - bpa.transpose() * llt.solve(bpa);
    next = 0.5 * (next + next.transpose());
    const double delta = (next - p).norm();  // Frobenius; >= operator norm
    p = next;
    if (delta <= kRelTol * (1.0 + p.norm())) {
      ++sweeps;
      break;
    }
  }
  if (sweeps >= kMaxSweeps) {
    throw std::runtime_error("solve_dare: value iteration did not converge");
  }

  DareSolution sol;
  sol.p = p;
  const Mat bpa = b.transpose() * p * a;
  Eigen::LLT<Mat> llt(r + b.transpose() * p * b);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("solve_dare: inner Gram matrix lost "
                             "positive definiteness");
  }
  sol.k_star = -llt.solve(bpa);
  const Mat defect =
      p - (q + a.transpose() * p * a - bpa.transpose() * llt.solve(bpa));
  sol.residual = operator_norm(defect);
  sol.iterations = sweeps;
  if (spectral_radius(a + b * sol.k_star) >= 1.0) {
    throw std::runtime_error(
        "solve_dare: computed gain does not stabilize the system");
  }
  return sol;
}

TransientBound transient_bound_mu(const Mat& m, int k_max,
                                  const TransientOptions& opts) {
  require_square(m, "transient_bound_mu");
  if (k_max < 1) {
    throw std::invalid_argument("transient_bound_mu: k_max must be >= 1");
  }
  const double rho = spectral_radius(m);
  if (rho >= 1.0) {
    throw std::invalid_argument(
        "transient_bound_mu: matrix is not strictly stable (rho >= 1)");
  }
  constexpr double kRhoFloor = 1e-12;
  TransientBound out;
  out.k_max = k_max;
  out.degenerate = rho < kRhoFloor;
  if (out.degenerate && !opts.allow_degenerate) {
    throw std::invalid_argument(
        "transient_bound_mu: spectral radius below 1e-12; the transient "
        "ratio is degenerate");
  }
  out.rho = out.degenerate ? kRhoFloor : rho;

  // k = 0 contributes ||I|| / rho^0 = 1 exactly.
  double mu = 1.0;
  Mat power = Mat::Identity(m.rows(), m.cols());
  const double log_rho = std::log(out.rho);
  for (int k = 1; k <= k_max; ++k) {
    power = power * m;
    const double norm = operator_norm(power);
    if (norm == 0.0) continue;  // nilpotent tail: ratio is zero from here on
    const double ratio = out.degenerate
                             ? norm
                             : std::exp(std::log(norm) - k * log_rho);
    mu = std::max(mu, ratio);
  }
  out.mu = mu;

  if (opts.with_resolvent) {
    // Geometric ladder of radii approaching 1 from above plus a far field;
    // enough to expose the Kreiss constant's order of magnitude.
    std::vector<double> radii;
    for (int i = 0; i <= 25; ++i) {
      radii.push_back(1.0 + std::pow(10.0, -3.0 + 5.0 * i / 25.0));
    }
    out.resolvent_estimate = resolvent_condition(m, radii, 64);
  }
  return out;
}

double resolvent_condition(const Mat& m, const std::vector<double>& radii,
                           int angles_per_radius) {
  require_square(m, "resolvent_condition");
  if (radii.empty() || angles_per_radius < 1) {
    throw std::invalid_argument(
        "resolvent_condition: need at least one radius and one angle");
  }
  if (spectral_radius(m) >= 1.0) {
    throw std::invalid_argument(
        "resolvent_condition: matrix is not strictly stable");
  }
  const Eigen::Index n = m.rows();
  const Eigen::MatrixXcd mc = m.cast<std::complex<double>>();
  double best = 0.0;
  for (const double radius : radii) {
    if (radius <= 1.0) {
      throw std::invalid_argument(
          "resolvent_condition: radii must exceed 1");
    }
    for (int j = 0; j < angles_per_radius; ++j) {
      const double theta =
          angles_per_radius == 1
              ? 0.0
              : std::numbers::pi * j / (angles_per_radius - 1);
      const std::complex<double> z = std::polar(radius, theta);
      const Eigen::MatrixXcd shifted =
          z * Eigen::MatrixXcd::Identity(n, n) - mc;
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(shifted);
      const double sigma_min = svd.singularValues()(n - 1);
      if (sigma_min <= 0.0) {
        throw std::runtime_error(
            "resolvent_condition: grid point hit a singular shift");
      }
      best = std::max(best, (radius - 1.0) / sigma_min);
    }
  }
  return best;
}

std::vector<double> char_poly_from_eigs(
    const std::vector<std::complex<double>>& lambdas) {
  if (lambdas.empty()) {
    throw std::invalid_argument("char_poly_from_eigs: empty eigenvalue list");
  }
  // Pair up non-real eigenvalues with their exact conjugates so every factor
  // of the expansion (linear or conjugate quadratic) has real coefficients.
  std::vector<std::complex<double>> pending = lambdas;
  std::vector<double> coeffs{1.0};
  auto multiply_by = [&coeffs](const std::vector<double>& factor) {
    std::vector<double> out(coeffs.size() + factor.size() - 1, 0.0);
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      for (std::size_t j = 0; j < factor.size(); ++j) {
        out[i + j] += coeffs[i] * factor[j];
      }
    }
    coeffs = std::move(out);
  };
  while (!pending.empty()) {
    const std::complex<double> lambda = pending.back();
    pending.pop_back();
    if (lambda.imag() == 0.0) {
      multiply_by({1.0, -lambda.real()});
      continue;
    }
    const auto partner = std::find(
        pending.begin(), pending.end(),
        std::complex<double>(lambda.real(), -lambda.imag()));
    if (partner == pending.end()) {
      throw std::invalid_argument(
          "char_poly_from_eigs: complex eigenvalue without an exact "
          "conjugate partner");
    }
    pending.erase(partner);
    multiply_by({1.0, -2.0 * lambda.real(), std::norm(lambda)});
  }
  return coeffs;
}

Mat place_poles(const Mat& a, const Mat& b,
                const std::vector<std::complex<double>>& lambdas) {
  require_square(a, "place_poles");
  const Eigen::Index n = a.rows();
  if (b.rows() != n || b.cols() == 0) {
    throw std::invalid_argument("place_poles: b has incompatible dimensions");
  }
  if (static_cast<Eigen::Index>(lambdas.size()) != n) {
    throw std::invalid_argument(
        "place_poles: need exactly n target eigenvalues");
  }
  if (controllability_rank(a, b) != static_cast<int>(n)) {
    throw std::invalid_argument("place_poles: (a, b) is not controllable");
  }
  const std::vector<double> poly = char_poly_from_eigs(lambdas);

  // phi(a) = a^n + c1 a^{n-1} + ... + cn I, by a matrix Horner sweep.
  Mat phi = Mat::Identity(n, n) * poly[0];
  for (std::size_t j = 1; j < poly.size(); ++j) {
    phi = phi * a + poly[j] * Mat::Identity(n, n);
  }

  std::vector<std::complex<double>> target = lambdas;
  sort_spectrum(target);

  constexpr int kMaxAttempts = 10;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    // Random single-input reduction: the generic direction v keeps (a, b v)
    // controllable. Fixed internal keying makes placement a pure function.
    NormalStream stream(RngKey{0xAC6E55A11ULL, StreamContext::kPlacement, 0,
                               static_cast<std::uint64_t>(attempt)});
    const Vec v = stream.next_vector(b.cols());
    const Vec b_single = b * v;

    Mat ctrb(n, n);
    Vec col = b_single;
    for (Eigen::Index k = 0; k < n; ++k) {
      ctrb.col(k) = col;
      if (k + 1 < n) col = a * col;
    }
    Eigen::JacobiSVD<Mat> svd(ctrb);
    const auto& sigma = svd.singularValues();
    if (sigma(0) == 0.0 || sigma(n - 1) <= 1e-10 * sigma(0)) {
      continue;  // unlucky direction; redraw
    }

    // Ackermann: k_row = -e_n^T ctrb^{-1} phi(a).
    Vec e_n = Vec::Zero(n);
    e_n(n - 1) = 1.0;
    const Vec w = ctrb.transpose().fullPivLu().solve(e_n);
    const Eigen::RowVectorXd k_row = -(w.transpose() * phi);
    const Mat gain = v * k_row;

    std::vector<std::complex<double>> achieved = eigenvalues_of(a + b * gain);
    sort_spectrum(achieved);
    bool ok = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double err = std::abs(achieved[i] - target[i]);
      if (err > 1e-6 * (1.0 + std::abs(target[i]))) {
        ok = false;
        break;
      }
    }
    if (ok) return gain;
  }
  throw std::runtime_error(
      "place_poles: no randomized reduction achieved the requested spectrum "
      "within tolerance");
}

}  // namespace lqrlab
