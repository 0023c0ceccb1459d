#pragma once

#include <utility>
#include <vector>

#include "nomlet/expr.hpp"

namespace nomlet {

// Alpha-equivalence of ground expressions. The letrec case backtracks over
// binding pairings (worst-case exponential, GI-complete in general) with a
// top-symbol compatibility pre-filter.
bool alpha_eq(const Expr& a, const Expr& b);

// Splits env into (garbage, non-garbage): the maximal sub-environment whose
// binders are unreferenced from the rest and from the body.
// Pre: ground bindings.
std::pair<std::vector<Binding>, std::vector<Binding>> garbage_split(
    const std::vector<Binding>& env, const Expr& body);

// True iff no letrec subexpression admits a nonempty garbage split.
bool is_garbage_free(const Expr& e);

// Extends the forced pairs {right binder -> left binder} to a bijection whose
// domain lies inside lefts+rights, pairing the leftover atoms in canonical
// order (the freshness side conditions make the choice irrelevant).
Perm extend_binder_bijection(const std::vector<std::pair<Atom, Atom>>& forced,
                             const AtomSet& lefts, const AtomSet& rights);

}  // namespace nomlet
