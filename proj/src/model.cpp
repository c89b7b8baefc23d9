#include "lqrlab/model.hpp"

#include <stdexcept>

#include "lqrlab/ctrlmath.hpp"

namespace lqrlab {

namespace {

bool symmetric_within(const Mat& m, double rel_tol) {
  const double scale = operator_norm(m);
  const double skew = operator_norm(Mat(m - m.transpose()));
  return skew <= rel_tol * scale || skew == 0.0;
}

void check_finite(std::vector<Violation>& out, const Mat& m, const char* name) {
  if (!m.allFinite()) {
    out.push_back({ViolationCode::kNonFinite,
                   std::string(name) + " contains a non-finite entry"});
  }
}

void check_dims(std::vector<Violation>& out, const Mat& m, Eigen::Index rows,
                Eigen::Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    out.push_back({ViolationCode::kDimMismatch,
                   std::string(name) + " must be " + std::to_string(rows) +
                       "x" + std::to_string(cols) + ", got " +
                       std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols())});
  }
}

}  // namespace

const char* to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::kNonFinite:
      return "NON_FINITE";
    case ViolationCode::kDimMismatch:
      return "DIM_MISMATCH";
    case ViolationCode::kBadHorizon:
      return "BAD_HORIZON";
    case ViolationCode::kQNotPsd:
      return "Q_NOT_PSD";
    case ViolationCode::kRNotPd:
      return "R_NOT_PD";
    case ViolationCode::kSigmaSNotPsd:
      return "SIGMA_S_NOT_PSD";
    case ViolationCode::kSigmaANotPd:
      return "SIGMA_A_NOT_PD";
  }
  return "UNKNOWN";
}

std::vector<Violation> validate(const LqrProblem& p, const GaussianPolicy& pol) {
  std::vector<Violation> out;
  if (p.a.rows() == 0 || p.a.rows() != p.a.cols()) {
    out.push_back({ViolationCode::kDimMismatch,
                   "a must be a non-empty square matrix"});
    return out;  // n is undefined; nothing below is checkable
  }
  if (p.b.rows() != p.a.rows() || p.b.cols() == 0) {
    out.push_back({ViolationCode::kDimMismatch,
                   "b must have n rows and at least one column"});
    return out;  // m is undefined
  }
  const Eigen::Index n = p.n();
  const Eigen::Index m = p.m();

  check_finite(out, p.a, "a");
  check_finite(out, p.b, "b");
  check_finite(out, p.q, "q");
  check_finite(out, p.r, "r");
  check_finite(out, p.sigma_s, "sigma_s");
  check_finite(out, pol.k, "k");
  check_finite(out, pol.sigma_a, "sigma_a");

  check_dims(out, p.q, n, n, "q");
  check_dims(out, p.r, m, m, "r");
  check_dims(out, p.sigma_s, n, n, "sigma_s");
  check_dims(out, pol.k, m, n, "k");
  check_dims(out, pol.sigma_a, m, m, "sigma_a");

  if (p.horizon < 1) {
    out.push_back({ViolationCode::kBadHorizon,
                   "horizon must be >= 1, got " + std::to_string(p.horizon)});
  }
  if (!out.empty()) return out;  // definiteness checks need sane inputs

  auto check_psd = [&out](const Mat& s, ViolationCode code, const char* name) {
    if (!symmetric_within(s, 1e-10) ||
        min_symmetric_eigenvalue(s) < -1e-10 * operator_norm(s)) {
      out.push_back({code, std::string(name) +
                               " must be symmetric positive semidefinite"});
    }
  };
  auto check_pd = [&out](const Mat& s, ViolationCode code, const char* name) {
    if (!symmetric_within(s, 1e-10) ||
        min_symmetric_eigenvalue(s) <= 1e-12 * operator_norm(s)) {
      out.push_back({code, std::string(name) +
                               " must be symmetric positive definite"});
    }
  };
  check_psd(p.q, ViolationCode::kQNotPsd, "q");
  check_pd(p.r, ViolationCode::kRNotPd, "r");
  check_psd(p.sigma_s, ViolationCode::kSigmaSNotPsd, "sigma_s");
  check_pd(pol.sigma_a, ViolationCode::kSigmaANotPd, "sigma_a");
  return out;
}

namespace {

void throw_violations(const std::vector<Violation>& violations) {
  if (violations.empty()) return;
  std::string message = "invalid problem/policy:";
  for (const auto& v : violations) {
    message += " [";
    message += to_string(v.code);
    message += "] ";
    message += v.detail;
    message += ";";
  }
  throw std::invalid_argument(message);
}

}  // namespace

void require_valid(const LqrProblem& p, const GaussianPolicy& pol) {
  throw_violations(validate(p, pol));
}

void require_valid_for_simulation(const LqrProblem& p,
                                  const GaussianPolicy& pol) {
  auto is_psd = [](const Mat& s) {
    return symmetric_within(s, 1e-10) &&
           min_symmetric_eigenvalue(s) >= -1e-10 * operator_norm(s);
  };
  auto violations = validate(p, pol);
  std::erase_if(violations, [&](const Violation& v) {
    return (v.code == ViolationCode::kSigmaANotPd && is_psd(pol.sigma_a)) ||
           (v.code == ViolationCode::kRNotPd && is_psd(p.r));
  });
  throw_violations(violations);
}

MomentTrace exact_moments(const LqrProblem& p, const GaussianPolicy& pol,
                          const Vec& s1) {
  require_valid_for_simulation(p, pol);
  if (s1.size() != p.n()) {
    throw std::invalid_argument("exact_moments: s1 has wrong dimension");
  }
  const Mat closed = p.a + p.b * pol.k;
  const Mat injected = p.sigma_s + p.b * pol.sigma_a * p.b.transpose();
  const double action_noise_cost = (p.r * pol.sigma_a).trace();

  MomentTrace trace;
  trace.second_moments.reserve(static_cast<std::size_t>(p.horizon));
  Mat s = s1 * s1.transpose();
  double cost = 0.0;
  for (int t = 1; t <= p.horizon; ++t) {
    trace.second_moments.push_back(s);
    cost += (p.q * s).trace() +
            (p.r * (pol.k * s * pol.k.transpose())).trace() +
            action_noise_cost;
    if (t < p.horizon) {
      s = closed * s * closed.transpose() + injected;
      s = 0.5 * (s + s.transpose());
    }
  }
  trace.expected_return = -cost;
  return trace;
}

double exact_return(const LqrProblem& p, const GaussianPolicy& pol,
                    const Vec& s1) {
  return exact_moments(p, pol, s1).expected_return;
}

}  // namespace lqrlab
