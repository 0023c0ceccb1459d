#pragma once

#include <utility>
#include <vector>

#include "nomlet/atoms.hpp"

namespace nomlet {

// Finite permutation on atoms, kept as a normalized atom->atom map over
// dom(pi) = { a | pi(a) != a }, sorted by canonical atom order.
// Composition and inverse are O(|dom|) map operations.
class Perm {
 public:
  Perm() = default;

  static Perm swap(Atom a, Atom b);
  // Builds from (from, to) pairs; entries with from == to are dropped.
  // Pre: the pairs form a bijection.
  static Perm from_pairs(std::vector<std::pair<Atom, Atom>> pairs);

  Atom apply(Atom a) const;
  Atom operator()(Atom a) const { return apply(a); }

  // Function composition: (p . q)(x) = p(q(x)).
  friend Perm compose(const Perm& p, const Perm& q);
  Perm inverse() const;

  bool is_identity() const { return map_.empty(); }
  AtomSet domain() const;
  const std::vector<std::pair<Atom, Atom>>& pairs() const { return map_; }

  // Decomposition into at most |dom|-1 swappings, in function-composition
  // order (the last swapping in the list is applied first).
  std::vector<std::pair<Atom, Atom>> to_swappings() const;

  friend bool operator==(const Perm&, const Perm&) = default;
  friend bool operator<(const Perm& a, const Perm& b) { return a.map_ < b.map_; }

 private:
  std::vector<std::pair<Atom, Atom>> map_;  // sorted by .first, no fixed points
};

Perm compose(const Perm& p, const Perm& q);

}  // namespace nomlet
