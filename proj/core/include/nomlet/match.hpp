#pragma once

#include <map>
#include <string>
#include <vector>

#include "nomlet/graph.hpp"
#include "nomlet/syntax.hpp"

namespace nomlet {

enum class MatchStatus { Sat, Unsat, Overflow };

struct MatchSolution {
  std::map<ExprVar, Expr> subst;
};

struct MatchStats {
  size_t states_explored = 0;
};

struct MatchResult {
  MatchStatus status;
  std::vector<MatchSolution> solutions;
  MatchStats stats;
};

struct MatchOptions {
  bool collecting = true;
  size_t budget = 1000000;
};

// One-sided matching s <= t with ground, permutation-free targets.
// The letrec rule explores binding pairings lazily (depth-first with
// constraint propagation), which enumerates exactly the branches of the
// nondeterministic rule while pruning dead pairings early.
MatchResult letrec_match(const MatchProblemFile& problem, const MatchOptions& opts = {});

std::string print_match_solution(const MatchSolution& s);

// Hamiltonian-cycle encoder: the matching problem is solvable iff the
// 3-regular graph has a Hamiltonian cycle.
MatchProblemFile encode_hamiltonian(const Graph& g);

// Graph-isomorphism encoder: single variable, garbage-free target; solvable
// iff the two regular graphs (same vertex/edge counts, degree >= 1) are
// isomorphic.
MatchProblemFile encode_graph_iso(const Graph& g1, const Graph& g2);

}  // namespace nomlet
