// SPDX-License-Identifier: Apache-2.0
//
// Exact solver for 0/1 covering programs and CPLEX LP text export.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fencer/ilp.hpp"

namespace fencer {

enum class SolveStatus { Optimal, Infeasible, CapExceeded };

std::string_view status_name(SolveStatus s);

struct Solution {
  std::vector<char> assignment;  // one entry per variable
  double objective = 0;
  SolveStatus status = SolveStatus::Optimal;
  std::uint64_t nodes = 0;
};

struct SolverOptions {
  std::uint64_t node_cap = 10'000'000;
  double time_limit_s = 60.0;  // wall clock for the whole search
};

// Branch and bound over variables in index order, 0-branch first, so the
// optimum returned is the lexicographically smallest optimal assignment.
Solution solve(const IlpProblem& p, const SolverOptions& opt = {});

class TooManyVariables : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kBruteForceMaxVars = 24;

// Exhaustive enumeration; same tie-break as solve.
Solution brute_force_solve(const IlpProblem& p);

// Dual-feasible fractional covering value: a lower bound on the optimum.
double lp_lower_bound(const IlpProblem& p);
// Greedy cover followed by redundancy removal: a feasible assignment.
std::vector<char> greedy_cover(const IlpProblem& p);

std::string export_lp(const IlpProblem& p);
// Reads what export_lp writes. Variable names must follow "<type>_<tag><id>".
// Throws std::invalid_argument on malformed input.
IlpProblem read_lp(const std::string& text);

}  // namespace fencer
