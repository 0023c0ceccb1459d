#pragma once

#include <map>

#include "nomlet/match.hpp"

namespace nomlet {

struct EnvMatchSolution {
  std::map<ExprVar, Expr> var_images;                  // ground
  std::map<AtomVar, Atom> atom_images;                 // ground
  std::map<EnvVar, std::vector<Binding>> env_images;   // ground binding multisets
};

struct EnvMatchResult {
  MatchStatus status;
  std::vector<EnvMatchSolution> solutions;
  size_t states_explored = 0;
};

// Matching over the tier with environment variables E in patterns against
// ground letrec targets. Each E is guessed as a fresh binding template
// A1.X1;...;Ak.Xk with k bounded by the target's slack; several environment
// variables inside one environment split the slack by composition.
EnvMatchResult env_match(const MatchProblemFile& problem, const MatchOptions& opts = {});

std::string print_env_match_solution(const EnvMatchSolution& s);

}  // namespace nomlet
