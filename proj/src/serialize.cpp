#include "lqrlab/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lqrlab {

std::string format_double(double x) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", x);
  return buffer;
}

namespace {

void write_matrix(std::ostream& os, const char* key, const Mat& m) {
  os << key;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      os << ' ' << format_double(m(i, j));
    }
  }
  os << '\n';
}

class BlockReader {
 public:
  explicit BlockReader(std::istream& is) : is_(is) {}

  // Next non-comment, non-blank line split into tokens.
  std::vector<std::string> next_line(const char* expected_key) {
    std::string line;
    while (std::getline(is_, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::vector<std::string> tokens;
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
      if (tokens.empty()) continue;
      if (tokens[0] != expected_key) {
        throw std::runtime_error("load_problem: expected key '" +
                                 std::string(expected_key) + "', got '" +
                                 tokens[0] + "'");
      }
      return tokens;
    }
    throw std::runtime_error("load_problem: unexpected end of input before '" +
                             std::string(expected_key) + "'");
  }

  long read_integer(const char* key) {
    const auto tokens = next_line(key);
    if (tokens.size() != 2) {
      throw std::runtime_error("load_problem: key '" + std::string(key) +
                               "' needs exactly one value");
    }
    std::size_t used = 0;
    long value = 0;
    try {
      value = std::stol(tokens[1], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tokens[1].size()) {
      throw std::runtime_error("load_problem: key '" + std::string(key) +
                               "' has a malformed integer '" + tokens[1] + "'");
    }
    return value;
  }

  Mat read_matrix(const char* key, Eigen::Index rows, Eigen::Index cols) {
    const auto tokens = next_line(key);
    if (static_cast<Eigen::Index>(tokens.size()) != rows * cols + 1) {
      throw std::runtime_error(
          "load_problem: key '" + std::string(key) + "' needs " +
          std::to_string(rows * cols) + " entries, got " +
          std::to_string(tokens.size() - 1));
    }
    Mat m(rows, cols);
    std::size_t idx = 1;
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j, ++idx) {
        std::size_t used = 0;
        double value = 0.0;
        try {
          value = std::stod(tokens[idx], &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != tokens[idx].size()) {
          throw std::runtime_error("load_problem: key '" + std::string(key) +
                                   "' has a malformed number '" + tokens[idx] +
                                   "'");
        }
        m(i, j) = value;
      }
    }
    return m;
  }

 private:
  std::istream& is_;
};

}  // namespace

void save_problem(std::ostream& os, const LqrProblem& p,
                  const GaussianPolicy& pol, const std::string& comment) {
  if (!comment.empty()) {
    std::istringstream cs(comment);
    std::string line;
    while (std::getline(cs, line)) os << "# " << line << '\n';
  }
  os << "format lqrlab.problem.v1\n";
  os << "n " << p.n() << '\n';
  os << "m " << p.m() << '\n';
  os << "horizon " << p.horizon << '\n';
  write_matrix(os, "a", p.a);
  write_matrix(os, "b", p.b);
  write_matrix(os, "q", p.q);
  write_matrix(os, "r", p.r);
  write_matrix(os, "sigma_s", p.sigma_s);
  write_matrix(os, "k", pol.k);
  write_matrix(os, "sigma_a", pol.sigma_a);
}

void save_problem(const std::string& path, const LqrProblem& p,
                  const GaussianPolicy& pol, const std::string& comment) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("save_problem: cannot open '" + path +
                             "' for writing");
  }
  save_problem(out, p, pol, comment);
  if (!out.good()) {
    throw std::runtime_error("save_problem: write to '" + path + "' failed");
  }
}

std::pair<LqrProblem, GaussianPolicy> load_problem(std::istream& is) {
  BlockReader reader(is);
  const auto header = reader.next_line("format");
  if (header.size() != 2 || header[1] != "lqrlab.problem.v1") {
    throw std::runtime_error("load_problem: unsupported format header");
  }
  const long n = reader.read_integer("n");
  const long m = reader.read_integer("m");
  const long horizon = reader.read_integer("horizon");
  if (n < 1 || m < 1) {
    throw std::runtime_error("load_problem: n and m must be >= 1");
  }
  LqrProblem p;
  GaussianPolicy pol;
  p.horizon = static_cast<int>(horizon);
  p.a = reader.read_matrix("a", n, n);
  p.b = reader.read_matrix("b", n, m);
  p.q = reader.read_matrix("q", n, n);
  p.r = reader.read_matrix("r", m, m);
  p.sigma_s = reader.read_matrix("sigma_s", n, n);
  pol.k = reader.read_matrix("k", m, n);
  pol.sigma_a = reader.read_matrix("sigma_a", m, m);
  return {p, pol};
}

std::pair<LqrProblem, GaussianPolicy> load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_problem: cannot open '" + path + "'");
  }
  return load_problem(in);
}

}  // namespace lqrlab
