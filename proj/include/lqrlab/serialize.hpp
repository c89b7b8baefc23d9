#pragma once

#include <iosfwd>
#include <string>
#include <utility>

#include "lqrlab/model.hpp"

namespace lqrlab {

// Writes a problem/policy pair as a line-oriented key-value text block
// ("lqrlab.problem.v1"). Matrix entries are rendered with 17 significant
// digits so a save/load round trip is bit-exact. Comment lines (leading '#')
// may precede the block and are ignored by the loader.
void save_problem(std::ostream& os, const LqrProblem& p,
                  const GaussianPolicy& pol, const std::string& comment = "");
void save_problem(const std::string& path, const LqrProblem& p,
                  const GaussianPolicy& pol, const std::string& comment = "");

// Parses a block written by save_problem. Throws std::runtime_error with the
// offending key/line on malformed input. The result is NOT re-validated;
// callers decide whether to run validate().
std::pair<LqrProblem, GaussianPolicy> load_problem(std::istream& is);
std::pair<LqrProblem, GaussianPolicy> load_problem(const std::string& path);

// Shared numeric formatting for all text output: shortest form preserving
// the double exactly ("%.17g").
std::string format_double(double x);

}  // namespace lqrlab
