#include "nomlet/permgroup.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>

namespace nomlet {

StabChain::StabChain(std::vector<Atom> carrier) : carrier_(std::move(carrier)) {
  std::sort(carrier_.begin(), carrier_.end());
  carrier_.erase(std::unique(carrier_.begin(), carrier_.end(),
                             [](Atom a, Atom b) { return a == b; }),
                 carrier_.end());
}

StabChain::PermV StabChain::to_vec(const Perm& p) const {
  PermV v(carrier_.size());
  for (size_t i = 0; i < carrier_.size(); ++i) {
    Atom img = p.apply(carrier_[i]);
    auto it = std::lower_bound(carrier_.begin(), carrier_.end(), img);
    assert(it != carrier_.end() && *it == img && "permutation leaves the carrier");
    v[i] = static_cast<int>(it - carrier_.begin());
  }
  return v;
}

bool StabChain::is_id(const PermV& v) const {
  for (size_t i = 0; i < v.size(); ++i)
    if (v[i] != static_cast<int>(i)) return false;
  return true;
}

StabChain::PermV StabChain::compose_v(const PermV& p, const PermV& q) const {
  PermV r(p.size());
  for (size_t i = 0; i < p.size(); ++i) r[i] = p[q[i]];
  return r;
}

StabChain::PermV StabChain::inverse_v(const PermV& p) const {
  PermV r(p.size());
  for (size_t i = 0; i < p.size(); ++i) r[p[i]] = static_cast<int>(i);
  return r;
}

// Orbit of base_[level] under gens_[level] (which holds every strong
// generator fixing the base prefix), with coset representatives.
void StabChain::rebuild_orbit(size_t level) {
  const size_t n = carrier_.size();
  transversal_[level].assign(n, PermV{});
  in_orbit_[level].assign(n, 0);
  int b = base_[level];
  PermV id(n);
  std::iota(id.begin(), id.end(), 0);
  transversal_[level][b] = id;
  in_orbit_[level][b] = 1;
  std::vector<int> frontier{b};
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int x : frontier) {
      for (const PermV& s : gens_[level]) {
        int y = s[x];
        if (!in_orbit_[level][y]) {
          in_orbit_[level][y] = 1;
          transversal_[level][y] = compose_v(s, transversal_[level][x]);
          next.push_back(y);
        }
      }
    }
    frontier = std::move(next);
  }
}

std::pair<StabChain::PermV, size_t> StabChain::sift(PermV v, size_t level) const {
  for (size_t i = level; i < base_.size(); ++i) {
    int x = v[base_[i]];
    if (!in_orbit_[i][x]) return {std::move(v), i};
    v = compose_v(inverse_v(transversal_[i][x]), v);
  }
  return {std::move(v), base_.size()};
}

// Stores g in every level of the chain it belongs to (all levels whose base
// prefix it fixes); extends the base when g fixes every current base point.
size_t StabChain::place(const PermV& g) {
  size_t j = 0;
  for (;; ++j) {
    if (j == base_.size()) {
      int b = -1;
      for (size_t i = 0; i < g.size(); ++i)
        if (g[i] != static_cast<int>(i)) {
          b = static_cast<int>(i);
          break;
        }
      assert(b >= 0);
      base_.push_back(b);
      gens_.emplace_back();
      transversal_.emplace_back();
      in_orbit_.emplace_back();
      rebuild_orbit(base_.size() - 1);
    }
    if (g[base_[j]] != static_cast<int>(base_[j])) break;
  }
  for (size_t k = 0; k <= j; ++k) gens_[k].push_back(g);
  return j;
}

// Ensures Stab(<gens_[i]>, base_[i]) = <gens_[i+1]> by sifting all Schreier
// generators; assumes the property already holds at deeper levels.
void StabChain::schreier_sims(size_t level) {
  rebuild_orbit(level);
  const size_t n = carrier_.size();
  for (size_t x = 0; x < n; ++x) {
    if (!in_orbit_[level][x]) continue;
    for (size_t si = 0; si < gens_[level].size(); ++si) {
      const PermV s = gens_[level][si];
      const PermV ux = transversal_[level][x];
      const PermV usx = transversal_[level][s[x]];
      PermV schreier = compose_v(inverse_v(usx), compose_v(s, ux));
      if (is_id(schreier)) continue;
      auto [res, lev] = sift(std::move(schreier), level + 1);
      if (is_id(res)) continue;
      size_t placed = place(res);
      assert(placed >= level + 1);
      for (size_t k = placed + 1; k-- > level + 1;) schreier_sims(k);
      // gens_[level] and the orbit are untouched by deeper insertions
    }
  }
}

void StabChain::add_generator(const Perm& p) {
  if (p.is_identity()) return;
  place(to_vec(p));
  for (size_t i = base_.size(); i-- > 0;) schreier_sims(i);
}

bool StabChain::contains(const Perm& p) const {
  if (p.is_identity()) return true;
  for (const auto& [from, to] : p.pairs())
    if (!std::binary_search(carrier_.begin(), carrier_.end(), from)) return false;
  auto [res, lev] = sift(to_vec(p), 0);
  return is_id(res);
}

bool group_member(const Perm& p, const std::vector<Perm>& gens) {
  if (p.is_identity()) return true;
  std::vector<Atom> carrier;
  auto add_dom = [&](const Perm& q) {
    for (const auto& [from, to] : q.pairs()) carrier.push_back(from);
  };
  add_dom(p);
  for (const Perm& g : gens) add_dom(g);
  StabChain chain(std::move(carrier));
  for (const Perm& g : gens)
    if (!g.is_identity()) chain.place_perm(g);
  chain.stabilize_all();
  return chain.contains(p);
}

void StabChain::place_perm(const Perm& p) { place(to_vec(p)); }

void StabChain::stabilize_all() {
  for (size_t i = base_.size(); i-- > 0;) schreier_sims(i);
}

std::vector<Perm> reduce_generators(const std::vector<Perm>& gens) {
  std::vector<char> alive(gens.size(), 1);
  for (size_t i = 0; i < gens.size(); ++i) {
    std::vector<Perm> rest;
    for (size_t j = 0; j < gens.size(); ++j)
      if (j != i && alive[j]) rest.push_back(gens[j]);
    if (group_member(gens[i], rest)) alive[i] = 0;
  }
  std::vector<Perm> out;
  for (size_t i = 0; i < gens.size(); ++i)
    if (alive[i]) out.push_back(gens[i]);
  return out;
}

}  // namespace nomlet
