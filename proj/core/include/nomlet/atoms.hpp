#pragma once

#include <compare>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <variant>

#include "nomlet/interner.hpp"

namespace nomlet {

// Object-level variable names, renamable by permutations.
struct Atom {
  uint32_t id;

  std::string_view name() const { return atom_names().name(id); }
  friend bool operator==(Atom, Atom) = default;
  // canonical (shortlex-name) total order
  friend bool operator<(Atom a, Atom b) {
    return a.id != b.id && shortlex_less(a.name(), b.name());
  }
};

// Meta-variable ranging over atoms only.
struct AtomVar {
  uint32_t id;
  std::string_view name() const { return atom_var_names().name(id); }
  friend bool operator==(AtomVar, AtomVar) = default;
  friend bool operator<(AtomVar a, AtomVar b) {
    return a.id != b.id && shortlex_less(a.name(), b.name());
  }
};

// Meta-variable ranging over expressions.
struct ExprVar {
  uint32_t id;
  std::string_view name() const { return expr_var_names().name(id); }
  friend bool operator==(ExprVar, ExprVar) = default;
  friend bool operator<(ExprVar a, ExprVar b) {
    return a.id != b.id && shortlex_less(a.name(), b.name());
  }
};

// Meta-variable ranging over partial letrec environments.
struct EnvVar {
  uint32_t id;
  std::string_view name() const { return env_var_names().name(id); }
  friend bool operator==(EnvVar, EnvVar) = default;
  friend bool operator<(EnvVar a, EnvVar b) {
    return a.id != b.id && shortlex_less(a.name(), b.name());
  }
};

// V ::= a | A.  In the ground and LRLX tiers only the Atom alternative occurs.
using VarOrAtom = std::variant<Atom, AtomVar>;

inline bool is_atom(const VarOrAtom& v) { return std::holds_alternative<Atom>(v); }
inline bool var_or_atom_less(const VarOrAtom& a, const VarOrAtom& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  if (is_atom(a)) return std::get<Atom>(a) < std::get<Atom>(b);
  return std::get<AtomVar>(a) < std::get<AtomVar>(b);
}

inline Atom mk_atom(std::string_view name) { return Atom{atom_names().intern(name)}; }
inline AtomVar mk_atom_var(std::string_view name) { return AtomVar{atom_var_names().intern(name)}; }
inline ExprVar mk_expr_var(std::string_view name) { return ExprVar{expr_var_names().intern(name)}; }
inline EnvVar mk_env_var(std::string_view name) { return EnvVar{env_var_names().intern(name)}; }

using AtomSet = std::set<Atom>;

// Lowest unused atom in the canonical sequence a, b, ..., z, a1, b1, ...
Atom fresh_atom(const AtomSet& avoid);

// Deterministic source of fresh expression variables, named _F1, _F2, ...
// starting above any _F<k> already interned with k <= seed scan.
class FreshVars {
 public:
  explicit FreshVars(uint64_t start = 1) : next_(start) {}
  ExprVar make();
  AtomVar make_atom_var();
  uint64_t next_index() const { return next_; }

 private:
  uint64_t next_;
};

}  // namespace nomlet
