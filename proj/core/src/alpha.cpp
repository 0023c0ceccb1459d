#include "nomlet/alpha.hpp"

#include <algorithm>
#include <cassert>

namespace nomlet {

namespace {

// Permutations only rename atoms, so a cheap invariant of each rhs: its top
// constructor with atoms identified. Used to prune the pairing search.
enum class TopClass : uint8_t { Atom, Lam, Fun, Letrec, Other };

struct TopKey {
  TopClass cls;
  uint32_t fun = 0;
  size_t n = 0;
  friend auto operator<=>(const TopKey&, const TopKey&) = default;
};

TopKey top_key(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
      return {TopClass::Atom};
    case ExprKind::Lam:
      return {TopClass::Lam};
    case ExprKind::Fun:
      return {TopClass::Fun, as_fun(e).sym.id};
    case ExprKind::Letrec:
      return {TopClass::Letrec, 0, as_letrec(e).env.size()};
    default:
      return {TopClass::Other};
  }
}

std::vector<Binding> ground_bindings(const Expr& letrec_expr) {
  std::vector<Binding> out;
  for (const EnvItem& item : as_letrec(letrec_expr).env) {
    assert(std::holds_alternative<Binding>(item));
    out.push_back(std::get<Binding>(item));
  }
  return out;
}

bool letrec_alpha(const Expr& a, const Expr& b) {
  auto ls = ground_bindings(a);
  auto rs = ground_bindings(b);
  if (ls.size() != rs.size()) return false;
  const size_t n = ls.size();
  const Expr& lbody = as_letrec(a).body;
  const Expr& rbody = as_letrec(b).body;

  // Freshness side condition {a1..an} # (letrec rights in rbody) does not
  // depend on the pairing.
  AtomSet right_fa = free_atoms(b);
  for (const Binding& lb : ls)
    if (right_fa.count(w_as_atom(lb.binder))) return false;

  // Pre-filter: multisets of rhs top classes must agree.
  std::vector<TopKey> lk, rk;
  for (const Binding& x : ls) lk.push_back(top_key(x.rhs));
  for (const Binding& x : rs) rk.push_back(top_key(x.rhs));
  {
    auto lk2 = lk, rk2 = rk;
    std::sort(lk2.begin(), lk2.end());
    std::sort(rk2.begin(), rk2.end());
    if (lk2 != rk2) return false;
  }

  AtomSet lefts, rights;
  for (const Binding& x : ls) lefts.insert(w_as_atom(x.binder));
  for (const Binding& x : rs) rights.insert(w_as_atom(x.binder));

  std::vector<size_t> rho(n);  // rho[i] = index into rs paired with ls[i]
  std::vector<bool> used(n, false);

  auto search = [&](auto&& self, size_t i) -> bool {
    if (i == n) {
      std::vector<std::pair<Atom, Atom>> forced;
      for (size_t k = 0; k < n; ++k)
        forced.push_back({w_as_atom(rs[rho[k]].binder), w_as_atom(ls[k].binder)});
      Perm pi = extend_binder_bijection(forced, lefts, rights);
      if (!alpha_eq(lbody, apply_perm(pi, rbody))) return false;
      for (size_t k = 0; k < n; ++k)
        if (!alpha_eq(ls[k].rhs, apply_perm(pi, rs[rho[k]].rhs))) return false;
      return true;
    }
    for (size_t j = 0; j < n; ++j) {
      if (used[j] || !(lk[i] == rk[j])) continue;
      used[j] = true;
      rho[i] = j;
      if (self(self, i + 1)) return true;
      used[j] = false;
    }
    return false;
  };
  return search(search, 0);
}

}  // namespace

bool alpha_eq(const Expr& a, const Expr& b) {
  if (&a.node() == &b.node()) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ExprKind::WLeaf:
      return w_as_atom(as_wleaf(a).w) == w_as_atom(as_wleaf(b).w);
    case ExprKind::Susp:
      assert(false && "alpha_eq needs ground expressions");
      return false;
    case ExprKind::Lam: {
      Atom x = w_as_atom(as_lam(a).binder);
      Atom y = w_as_atom(as_lam(b).binder);
      if (x == y) return alpha_eq(as_lam(a).body, as_lam(b).body);
      if (free_atoms(as_lam(b).body).count(x)) return false;  // x # body'
      return alpha_eq(as_lam(a).body, apply_perm(Perm::swap(x, y), as_lam(b).body));
    }
    case ExprKind::Fun: {
      const auto& fa = as_fun(a);
      const auto& fb = as_fun(b);
      if (!(fa.sym == fb.sym) || fa.args.size() != fb.args.size()) return false;
      for (size_t i = 0; i < fa.args.size(); ++i)
        if (!alpha_eq(fa.args[i], fb.args[i])) return false;
      return true;
    }
    case ExprKind::Letrec:
      return letrec_alpha(a, b);
  }
  return false;
}

std::pair<std::vector<Binding>, std::vector<Binding>> garbage_split(
    const std::vector<Binding>& env, const Expr& body) {
  AtomSet needed = free_atoms(body);
  std::vector<bool> live(env.size(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < env.size(); ++i) {
      if (live[i]) continue;
      if (needed.count(w_as_atom(env[i].binder))) {
        live[i] = true;
        changed = true;
        AtomSet fa = free_atoms(env[i].rhs);
        needed.insert(fa.begin(), fa.end());
      }
    }
  }
  std::pair<std::vector<Binding>, std::vector<Binding>> out;
  for (size_t i = 0; i < env.size(); ++i)
    (live[i] ? out.second : out.first).push_back(env[i]);
  return out;
}

Perm extend_binder_bijection(const std::vector<std::pair<Atom, Atom>>& forced,
                             const AtomSet& lefts, const AtomSet& rights) {
  AtomSet universe = lefts;
  universe.insert(rights.begin(), rights.end());
  AtomSet dom_used, img_used;
  for (auto& [from, to] : forced) {
    dom_used.insert(from);
    img_used.insert(to);
  }
  std::vector<Atom> src, dst;
  for (Atom a : universe)
    if (!dom_used.count(a)) src.push_back(a);
  for (Atom a : universe)
    if (!img_used.count(a)) dst.push_back(a);
  assert(src.size() == dst.size());
  auto pairs = forced;
  for (size_t i = 0; i < src.size(); ++i) pairs.push_back({src[i], dst[i]});
  return Perm::from_pairs(std::move(pairs));
}

bool is_garbage_free(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
    case ExprKind::Susp:
      return true;
    case ExprKind::Lam:
      return is_garbage_free(as_lam(e).body);
    case ExprKind::Fun:
      for (const Expr& a : as_fun(e).args)
        if (!is_garbage_free(a)) return false;
      return true;
    case ExprKind::Letrec: {
      std::vector<Binding> env = ground_bindings(e);
      auto [garbage, rest] = garbage_split(env, as_letrec(e).body);
      if (!garbage.empty()) return false;
      for (const Binding& b : env)
        if (!is_garbage_free(b.rhs)) return false;
      return is_garbage_free(as_letrec(e).body);
    }
  }
  return true;
}

}  // namespace nomlet
