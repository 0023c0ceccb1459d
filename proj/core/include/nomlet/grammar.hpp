#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "nomlet/permx.hpp"

namespace nomlet {

// Deterministic, non-recursive grammar compressing permutation compositions.
// Every nonterminal P has exactly one rule P -> w1 ... wn (n <= 2 here) whose
// symbols are earlier nonterminals or terminals (the empty permutation or a
// swapping), and a paired inverse nonterminal with the mirrored rule.
// Append-only: nonterminals are never removed or rewritten.
class PermGrammar {
 public:
  struct Empty {};
  using Sym = std::variant<Empty, SwapW, NtId>;

  PermGrammar();

  NtId empty() const { return 0; }
  NtId swap_nt(SwapW s);
  NtId compose(NtId p, NtId q);
  NtId inverse(NtId p) const { return rules_[p].inv; }

  // Interns any permutation representation as a nonterminal.
  NtId intern(const PermPtr& p);

  bool is_ground(NtId p) const { return rules_[p].ground; }
  const AtomSet& atoms(NtId p) const { return rules_[p].atoms; }
  const std::set<AtomVar>& atom_vars(NtId p) const { return rules_[p].avars; }

  // val(P) as an explicit map; pre: is_ground(p).
  const Perm& eval_ground(NtId p) const;

  // Clones the sub-DAG with A replaced by b; unaffected nodes are reused.
  NtId subst_atom_var(NtId p, AtomVar a, Atom b);

  // Expansion to a flat swapping list (function-composition order); only
  // sensible for output at desk scale, may be exponential in principle.
  std::vector<SwapW> expand(NtId p) const;

  size_t size() const { return rules_.size(); }
  size_t dag_size(NtId p) const;

 private:
  struct Rule {
    std::vector<Sym> rhs;
    NtId inv;
    bool ground;
    AtomSet atoms;
    std::set<AtomVar> avars;
    mutable std::optional<Perm> eval;  // memoized val(P), ground only
  };

  NtId add(std::vector<Sym> rhs);
  void link_inverses(NtId p, NtId q);

  std::vector<Rule> rules_;
};

}  // namespace nomlet
