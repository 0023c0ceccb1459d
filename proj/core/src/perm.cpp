#include "nomlet/perm.hpp"

#include <algorithm>
#include <cassert>

namespace nomlet {

Atom fresh_atom(const AtomSet& avoid) {
  for (uint64_t k = 0;; ++k) {
    for (char c = 'a'; c <= 'z'; ++c) {
      std::string name(1, c);
      if (k > 0) name += std::to_string(k);
      Atom a = mk_atom(name);
      if (!avoid.count(a)) return a;
    }
  }
}

ExprVar FreshVars::make() {
  return mk_expr_var("_F" + std::to_string(next_++));
}

AtomVar FreshVars::make_atom_var() {
  return mk_atom_var("_A" + std::to_string(next_++));
}

Perm Perm::swap(Atom a, Atom b) {
  if (a == b) return Perm{};
  Perm p;
  p.map_ = {{a, b}, {b, a}};
  std::sort(p.map_.begin(), p.map_.end());
  return p;
}

Perm Perm::from_pairs(std::vector<std::pair<Atom, Atom>> pairs) {
  Perm p;
  for (auto& [from, to] : pairs)
    if (!(from == to)) p.map_.push_back({from, to});
  std::sort(p.map_.begin(), p.map_.end());
#ifndef NDEBUG
  for (size_t i = 1; i < p.map_.size(); ++i)
    assert(!(p.map_[i - 1].first == p.map_[i].first));
#endif
  return p;
}

Atom Perm::apply(Atom a) const {
  auto it = std::lower_bound(map_.begin(), map_.end(), a,
                             [](const auto& e, Atom x) { return e.first < x; });
  if (it != map_.end() && it->first == a) return it->second;
  return a;
}

Perm compose(const Perm& p, const Perm& q) {
  std::vector<std::pair<Atom, Atom>> pairs;
  pairs.reserve(p.map_.size() + q.map_.size());
  for (const auto& [from, to] : q.map_) pairs.push_back({from, p.apply(to)});
  for (const auto& [from, to] : p.map_) {
    if (q.apply(from) == from && !(from == to)) pairs.push_back({from, to});
  }
  return Perm::from_pairs(std::move(pairs));
}

Perm Perm::inverse() const {
  std::vector<std::pair<Atom, Atom>> pairs;
  pairs.reserve(map_.size());
  for (const auto& [from, to] : map_) pairs.push_back({to, from});
  return Perm::from_pairs(std::move(pairs));
}

AtomSet Perm::domain() const {
  AtomSet dom;
  for (const auto& [from, to] : map_) dom.insert(from);
  return dom;
}

std::vector<std::pair<Atom, Atom>> Perm::to_swappings() const {
  // Peel cycles starting from the smallest atom of each; a k-cycle yields
  // k-1 swappings.
  std::vector<std::pair<Atom, Atom>> swaps;
  AtomSet done;
  for (const auto& [start, unused] : map_) {
    if (done.count(start)) continue;
    // cycle: start -> apply(start) -> ...
    std::vector<Atom> cycle{start};
    done.insert(start);
    for (Atom x = apply(start); !(x == start); x = apply(x)) {
      cycle.push_back(x);
      done.insert(x);
    }
    // (c0 c1 ... ck) = (c0 c1) . (c1 c2) . ... . (c(k-1) ck), applied right
    // to left.
    for (size_t i = 0; i + 1 < cycle.size(); ++i)
      swaps.push_back({cycle[i], cycle[i + 1]});
  }
#ifndef NDEBUG
  Perm check;
  for (auto it = swaps.rbegin(); it != swaps.rend(); ++it)
    check = compose(Perm::swap(it->first, it->second), check);
  assert(check == *this);
#endif
  return swaps;
}

}  // namespace nomlet
