#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "nomlet/expr.hpp"

namespace nomlet {

// Single freshness constraint V # e with a possibly suspended subject;
// pi.V # e is identified with V # pi^-1.e during simplification.
struct Freshness {
  W subject;
  Expr target;
};

// Equality constraint V1 =# pi.V2, shorthand for V1 # lam pi.V2 . V1.
struct FreshEq {
  W lhs;
  W rhs;
};

struct AtomicFreshness {
  Atom atom;
  ExprVar var;
  friend bool operator==(const AtomicFreshness&, const AtomicFreshness&) = default;
  friend bool operator<(const AtomicFreshness& a, const AtomicFreshness& b) {
    if (!(a.atom == b.atom)) return a.atom < b.atom;
    return !(a.var == b.var) && shortlex_less(a.var.name(), b.var.name());
  }
};

// Simplified freshness context: either bottom, or atomic constraints plus
// (in the tier with atom variables) constraints stuck on atom variables.
struct FreshnessContext {
  bool bot = false;
  std::set<AtomicFreshness> atomic;
  std::vector<Freshness> suspended;
  std::vector<FreshEq> equalities;

  bool fully_atomic() const {
    return !bot && suspended.empty() && equalities.empty();
  }
};

// Applies the simplification rules to a fixed point. In the LRLX tier the
// result is atomic or bottom; constraints involving atom variables are kept
// suspended. Runs in polynomial time.
FreshnessContext simplify(std::vector<Freshness> constraints, PermGrammar* g = nullptr);

void add_constraint(FreshnessContext& ctx, Freshness f, PermGrammar* g = nullptr);
void add_equality(FreshnessContext& ctx, FreshEq eq, PermGrammar* g = nullptr);
void merge_into(FreshnessContext& ctx, const FreshnessContext& other, PermGrammar* g = nullptr);

// Substitution of an expression variable (resimplifies affected constraints).
void subst_expr_var(FreshnessContext& ctx, ExprVar x, const Expr& value, PermGrammar* g = nullptr);
// Substitution of an atom variable by an atom.
void subst_atom_var_ctx(FreshnessContext& ctx, AtomVar a, Atom b, PermGrammar* g = nullptr);

// True iff every constraint holds after instantiating with the ground
// substitution rho (which must ground all variables involved).
bool check_ground(const std::vector<Freshness>& constraints,
                  const std::map<ExprVar, Expr>& rho);

struct AvWitness {
  std::map<AtomVar, Atom> assignment;
};

// Decides satisfiability of a context with atom variables by guessing the
// image of every atom variable among the context's atoms plus fresh ones
// (pool extended by one fresh atom per atom variable), then simplifying.
// `accept` can veto an instantiation (used to re-check constraints against
// an accumulated substitution); it receives the fully simplified context.
std::optional<AvWitness> av_satisfiable(
    const FreshnessContext& ctx, PermGrammar* g = nullptr,
    const std::function<bool(const FreshnessContext&)>& accept = {});

// All satisfying assignments over the same pool (used by collecting modes).
std::vector<AvWitness> av_witnesses(
    const FreshnessContext& ctx, PermGrammar* g = nullptr,
    const std::function<bool(const FreshnessContext&)>& accept = {});

}  // namespace nomlet
