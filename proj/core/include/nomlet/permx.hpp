#pragma once

#include <memory>
#include <set>
#include <variant>
#include <vector>

#include "nomlet/perm.hpp"

namespace nomlet {

class PermGrammar;
using NtId = uint32_t;

class PermX;
// nullptr denotes the identity permutation throughout.
using PermPtr = std::shared_ptr<const PermX>;

// W ::= pi . V, a permutation applied to an atom or atom variable.
// Normalized: a ground permutation on a plain atom is evaluated away, so
// perm != nullptr implies the suspension is stuck on an atom variable
// somewhere.
struct W {
  PermPtr perm;  // nullptr = identity
  VarOrAtom v;
};

// Swapping of two suspensions (W W). Self-inverse as a permutation.
struct SwapW {
  W lhs, rhs;
};

// Permutation in the tier with atom variables. Three representations:
//   Ground - normalized atom map (always used when no atom variables occur)
//   Swaps  - syntactic swapping list, function-composition order
//            (the last element of the list is applied first)
//   Nt     - nonterminal of a PermGrammar (compressed form)
// Invariant: Swaps and Nt forms contain at least one atom variable; fully
// ground permutations are always kept in Ground form.
class PermX {
 public:
  struct Swaps {
    std::vector<SwapW> list;
  };
  struct Nt {
    NtId id;
  };
  using Rep = std::variant<Perm, Swaps, Nt>;

  explicit PermX(Rep rep) : rep_(std::move(rep)) {}
  const Rep& rep() const { return rep_; }

  bool is_ground() const { return std::holds_alternative<Perm>(rep_); }
  const Perm& ground() const { return std::get<Perm>(rep_); }

 private:
  Rep rep_;
};

// Factories; all return nullptr for the identity.
PermPtr px_ground(Perm p);
// Folds ground swappings into a map; keeps the list form otherwise.
PermPtr px_swaps(std::vector<SwapW> swaps);
PermPtr px_nt(NtId id, const PermGrammar& g);
PermPtr px_swap(W a, W b);

bool px_is_ground(const PermPtr& p);
// Pre: px_is_ground. Grammar needed only for the Nt form.
Perm px_eval_ground(const PermPtr& p, const PermGrammar* g);

// mk_w normalizes: ground permutation on a plain atom is applied.
W mk_w(PermPtr perm, VarOrAtom v, const PermGrammar* g);
inline W w_atom(Atom a) { return W{nullptr, VarOrAtom{a}}; }
inline W w_avar(AtomVar a) { return W{nullptr, VarOrAtom{a}}; }
bool w_is_atom(const W& w);
Atom w_as_atom(const W& w);

// Composition p . q (q applied first). When a grammar is supplied and either
// operand is compressed, the result is compressed.
PermPtr px_compose(const PermPtr& p, const PermPtr& q, PermGrammar* g);
PermPtr px_inverse(const PermPtr& p, PermGrammar* g);

// Syntactic atom/atom-variable support, including inside nested suspensions.
void px_collect_atoms(const PermPtr& p, const PermGrammar* g, AtomSet& out);
void px_collect_atom_vars(const PermPtr& p, const PermGrammar* g, std::set<AtomVar>& out);
void w_collect_atoms(const W& w, const PermGrammar* g, AtomSet& out);
void w_collect_atom_vars(const W& w, const PermGrammar* g, std::set<AtomVar>& out);

// Substitutes an atom variable by an atom; extends the grammar with cloned
// nonterminals where needed (append-only).
PermPtr px_subst_atom_var(const PermPtr& p, AtomVar a, Atom b, PermGrammar* g);

W w_subst_atom_var(const W& w, AtomVar a, Atom b, PermGrammar* g);

// Number of swapping symbols, with grammar nonterminals measured by their
// DAG size rather than their expansion.
size_t px_size(const PermPtr& p, const PermGrammar* g);

bool w_equal(const W& a, const W& b);
int w_cmp(const W& a, const W& b);
int px_cmp(const PermPtr& a, const PermPtr& b);
size_t w_hash(const W& w);
size_t px_hash(const PermPtr& p);

}  // namespace nomlet
