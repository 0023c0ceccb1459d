#pragma once

#include <map>
#include <vector>

#include "nomlet/expr.hpp"
#include "nomlet/freshness.hpp"
#include "nomlet/graph.hpp"

namespace nomlet::oracle {

// Brute-force reference implementations used to validate the main modules on
// small instances. Deliberately unoptimized and independent of the main code
// paths (they share only the syntax types); guarded against oversized inputs.

struct OracleLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Direct transcription of the alpha-equivalence definition with exhaustive
// search over binding pairings and all permutation extensions.
bool alpha_eq_naive(const Expr& a, const Expr& b);

Expr apply_perm_naive(const Perm& p, const Expr& e);
AtomSet free_atoms_naive(const Expr& e);

// All ground expressions over the atom pool and signature with term depth
// <= depth (leaves have depth 1) and letrec environments of at most max_env
// bindings. Throws OracleLimitError beyond `cap` expressions.
std::vector<Expr> enum_ground_exprs(const std::vector<Atom>& pool, const Signature& sig,
                                    size_t depth, size_t max_env, size_t cap = 2000000);

// Exactly the ground substitutions (over the candidate set) satisfying all
// equations modulo alpha_eq_naive and all freshness constraints.
std::vector<std::map<ExprVar, Expr>> enum_ground_solutions(
    const std::vector<std::pair<Expr, Expr>>& equations,
    const std::vector<Freshness>& freshness, const std::vector<Expr>& candidates);

// Exhaustive Hamiltonian-cycle search; |V| <= 12.
bool ham_cycle(const Graph& g);
// Exhaustive isomorphism search; |V| <= 12 each.
bool graph_iso(const Graph& a, const Graph& b);

// Group membership by closure enumeration; carrier <= 6 atoms.
bool naive_group_member(const Perm& p, const std::vector<Perm>& gens);

}  // namespace nomlet::oracle
