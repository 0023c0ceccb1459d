#include "nomlet/oracle.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>

namespace nomlet::oracle {

namespace {

Atom w_atom_of(const W& w) {
  assert(w_is_atom(w));
  return w_as_atom(w);
}

std::vector<Binding> bindings_of(const Expr& e) {
  std::vector<Binding> out;
  for (const EnvItem& item : as_letrec(e).env) out.push_back(std::get<Binding>(item));
  return out;
}

}  // namespace

Expr apply_perm_naive(const Perm& p, const Expr& e) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
      return mk_atom_leaf(p.apply(w_atom_of(as_wleaf(e).w)));
    case ExprKind::Susp: {
      const auto& s = as_susp(e);
      return mk_susp(px_ground(compose(p, px_eval_ground(s.perm, nullptr))), s.var);
    }
    case ExprKind::Lam:
      return mk_lam(w_atom(p.apply(w_atom_of(as_lam(e).binder))),
                    apply_perm_naive(p, as_lam(e).body));
    case ExprKind::Fun: {
      std::vector<Expr> args;
      for (const Expr& a : as_fun(e).args) args.push_back(apply_perm_naive(p, a));
      return mk_fun(as_fun(e).sym, std::move(args));
    }
    case ExprKind::Letrec: {
      std::vector<EnvItem> env;
      for (const Binding& b : bindings_of(e))
        env.push_back(Binding{w_atom(p.apply(w_atom_of(b.binder))),
                              apply_perm_naive(p, b.rhs)});
      return mk_letrec(std::move(env), apply_perm_naive(p, as_letrec(e).body));
    }
  }
  return e;
}

AtomSet free_atoms_naive(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
      return {w_atom_of(as_wleaf(e).w)};
    case ExprKind::Susp:
      return {};
    case ExprKind::Lam: {
      AtomSet fa = free_atoms_naive(as_lam(e).body);
      fa.erase(w_atom_of(as_lam(e).binder));
      return fa;
    }
    case ExprKind::Fun: {
      AtomSet fa;
      for (const Expr& a : as_fun(e).args) {
        AtomSet sub = free_atoms_naive(a);
        fa.insert(sub.begin(), sub.end());
      }
      return fa;
    }
    case ExprKind::Letrec: {
      AtomSet fa = free_atoms_naive(as_letrec(e).body);
      for (const Binding& b : bindings_of(e)) {
        AtomSet sub = free_atoms_naive(b.rhs);
        fa.insert(sub.begin(), sub.end());
      }
      for (const Binding& b : bindings_of(e)) fa.erase(w_atom_of(b.binder));
      return fa;
    }
  }
  return {};
}

namespace {

bool letrec_alpha_naive(const Expr& a, const Expr& b) {
  auto ls = bindings_of(a);
  auto rs = bindings_of(b);
  if (ls.size() != rs.size()) return false;
  const size_t n = ls.size();

  AtomSet lefts, rights, universe;
  for (const Binding& x : ls) lefts.insert(w_atom_of(x.binder));
  for (const Binding& x : rs) rights.insert(w_atom_of(x.binder));
  universe = lefts;
  universe.insert(rights.begin(), rights.end());

  AtomSet right_fa = free_atoms_naive(b);

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  do {
    // pairing: ls[i] with rs[order[i]]; forced pi(binder of rs[order[i]]) = binder of ls[i]
    bool fresh_ok = true;
    for (const Binding& lb : ls)
      if (right_fa.count(w_atom_of(lb.binder))) fresh_ok = false;
    if (!fresh_ok) break;  // independent of the pairing

    std::vector<std::pair<Atom, Atom>> forced;
    AtomSet dom_used, img_used;
    bool consistent = true;
    for (size_t i = 0; i < n && consistent; ++i) {
      Atom from = w_atom_of(rs[order[i]].binder);
      Atom to = w_atom_of(ls[i].binder);
      forced.push_back({from, to});
      if (!dom_used.insert(from).second || !img_used.insert(to).second) consistent = false;
    }
    if (!consistent) continue;

    std::vector<Atom> src, dst;
    for (Atom x : universe)
      if (!dom_used.count(x)) src.push_back(x);
    for (Atom x : universe)
      if (!img_used.count(x)) dst.push_back(x);
    std::vector<size_t> ext(src.size());
    std::iota(ext.begin(), ext.end(), 0);
    // exhaustive over all bijective extensions
    do {
      auto pairs = forced;
      for (size_t i = 0; i < src.size(); ++i) pairs.push_back({src[i], dst[ext[i]]});
      Perm pi = Perm::from_pairs(pairs);
      bool ok = alpha_eq_naive(as_letrec(a).body, apply_perm_naive(pi, as_letrec(b).body));
      for (size_t i = 0; i < n && ok; ++i)
        ok = alpha_eq_naive(ls[i].rhs, apply_perm_naive(pi, rs[order[i]].rhs));
      if (ok) return true;
    } while (std::next_permutation(ext.begin(), ext.end()));
  } while (std::next_permutation(order.begin(), order.end()));
  return false;
}

}  // namespace

bool alpha_eq_naive(const Expr& a, const Expr& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ExprKind::WLeaf:
      return w_atom_of(as_wleaf(a).w) == w_atom_of(as_wleaf(b).w);
    case ExprKind::Susp:
      assert(false && "oracle alpha works on ground expressions");
      return false;
    case ExprKind::Lam: {
      Atom x = w_atom_of(as_lam(a).binder);
      Atom y = w_atom_of(as_lam(b).binder);
      if (x == y) return alpha_eq_naive(as_lam(a).body, as_lam(b).body);
      if (free_atoms_naive(as_lam(b).body).count(x)) return false;
      return alpha_eq_naive(as_lam(a).body,
                            apply_perm_naive(Perm::swap(x, y), as_lam(b).body));
    }
    case ExprKind::Fun: {
      const auto& fa = as_fun(a);
      const auto& fb = as_fun(b);
      if (!(fa.sym == fb.sym) || fa.args.size() != fb.args.size()) return false;
      for (size_t i = 0; i < fa.args.size(); ++i)
        if (!alpha_eq_naive(fa.args[i], fb.args[i])) return false;
      return true;
    }
    case ExprKind::Letrec:
      return letrec_alpha_naive(a, b);
  }
  return false;
}

std::vector<Expr> enum_ground_exprs(const std::vector<Atom>& pool, const Signature& sig,
                                    size_t depth, size_t max_env, size_t cap) {
  std::vector<Expr> cur;
  for (Atom a : pool) cur.push_back(mk_atom_leaf(a));
  for (auto& [f, ar] : sig.table())
    if (ar == 0) cur.push_back(mk_fun(f, {}));

  auto guard = [&](size_t n) {
    if (n > cap) throw OracleLimitError("oracle expression enumeration too large");
  };

  for (size_t d = 2; d <= depth; ++d) {
    std::vector<Expr> next = cur;
    // function applications
    for (auto& [f, ar] : sig.table()) {
      if (ar == 0) continue;
      std::vector<size_t> idx(ar, 0);
      for (;;) {
        std::vector<Expr> args;
        for (size_t i : idx) args.push_back(cur[i]);
        next.push_back(mk_fun(f, std::move(args)));
        guard(next.size());
        size_t k = 0;
        while (k < ar && ++idx[k] == cur.size()) idx[k++] = 0;
        if (k == ar) break;
      }
    }
    // abstractions
    for (Atom a : pool)
      for (const Expr& b : cur) {
        next.push_back(mk_lam(w_atom(a), b));
        guard(next.size());
      }
    // letrec with 1..max_env bindings; binder sets enumerated in ascending
    // order (environments are multisets, so this is one canonical choice)
    for (size_t k = 1; k <= max_env && k <= pool.size(); ++k) {
      std::vector<size_t> binders(k);
      std::iota(binders.begin(), binders.end(), 0);
      for (;;) {
        std::vector<size_t> rhs(k, 0);
        for (;;) {
          for (const Expr& body : cur) {
            std::vector<EnvItem> env;
            for (size_t i = 0; i < k; ++i)
              env.push_back(Binding{w_atom(pool[binders[i]]), cur[rhs[i]]});
            next.push_back(mk_letrec(std::move(env), body));
            guard(next.size());
          }
          size_t j = 0;
          while (j < k && ++rhs[j] == cur.size()) rhs[j++] = 0;
          if (j == k) break;
        }
        // next ascending binder combination
        size_t j = k;
        while (j > 0) {
          --j;
          if (binders[j] != pool.size() - k + j) break;
        }
        if (binders[j] == pool.size() - k + j) break;
        ++binders[j];
        for (size_t l = j + 1; l < k; ++l) binders[l] = binders[l - 1] + 1;
      }
    }
    std::sort(next.begin(), next.end(), [](const Expr& a, const Expr& b) { return cmp(a, b) < 0; });
    next.erase(std::unique(next.begin(), next.end(),
                           [](const Expr& a, const Expr& b) { return cmp(a, b) == 0; }),
               next.end());
    cur = std::move(next);
  }
  return cur;
}

namespace {

Expr subst_naive(const Expr& e, const std::map<ExprVar, Expr>& rho) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
      return e;
    case ExprKind::Susp: {
      const auto& s = as_susp(e);
      auto it = rho.find(s.var);
      assert(it != rho.end());
      return apply_perm_naive(px_eval_ground(s.perm, nullptr), it->second);
    }
    case ExprKind::Lam:
      return mk_lam(as_lam(e).binder, subst_naive(as_lam(e).body, rho));
    case ExprKind::Fun: {
      std::vector<Expr> args;
      for (const Expr& a : as_fun(e).args) args.push_back(subst_naive(a, rho));
      return mk_fun(as_fun(e).sym, std::move(args));
    }
    case ExprKind::Letrec: {
      std::vector<EnvItem> env;
      for (const Binding& b : bindings_of(e))
        env.push_back(Binding{b.binder, subst_naive(b.rhs, rho)});
      return mk_letrec(std::move(env), subst_naive(as_letrec(e).body, rho));
    }
  }
  return e;
}

}  // namespace

std::vector<std::map<ExprVar, Expr>> enum_ground_solutions(
    const std::vector<std::pair<Expr, Expr>>& equations,
    const std::vector<Freshness>& freshness, const std::vector<Expr>& candidates) {
  std::set<ExprVar> var_set;
  for (auto& [l, r] : equations) {
    collect_expr_vars(l, var_set);
    collect_expr_vars(r, var_set);
  }
  for (const Freshness& f : freshness) collect_expr_vars(f.target, var_set);
  std::vector<ExprVar> vars(var_set.begin(), var_set.end());

  // check each equation as soon as all its variables are assigned
  auto stage_of = [&](const Expr& l, const Expr& r) {
    std::set<ExprVar> vs;
    collect_expr_vars(l, vs);
    collect_expr_vars(r, vs);
    size_t stage = 0;
    for (size_t i = 0; i < vars.size(); ++i)
      if (vs.count(vars[i])) stage = i + 1;
    return stage;
  };
  std::vector<std::vector<size_t>> eq_at(vars.size() + 1);
  for (size_t e = 0; e < equations.size(); ++e)
    eq_at[stage_of(equations[e].first, equations[e].second)].push_back(e);

  std::vector<std::map<ExprVar, Expr>> out;
  std::map<ExprVar, Expr> rho;
  auto check_stage = [&](size_t stage) {
    for (size_t e : eq_at[stage]) {
      if (!alpha_eq_naive(subst_naive(equations[e].first, rho),
                          subst_naive(equations[e].second, rho)))
        return false;
    }
    return true;
  };
  auto rec = [&](auto&& self, size_t i) -> void {
    if (!check_stage(i)) return;
    if (i == vars.size()) {
      for (const Freshness& f : freshness) {
        Expr t = subst_naive(f.target, rho);
        if (free_atoms_naive(t).count(w_as_atom(f.subject))) return;
      }
      out.push_back(rho);
      return;
    }
    for (const Expr& c : candidates) {
      rho[vars[i]] = c;
      self(self, i + 1);
    }
    rho.erase(vars[i]);
  };
  rec(rec, 0);
  return out;
}

bool ham_cycle(const Graph& g) {
  const size_t n = g.num_vertices();
  if (n > 12) throw OracleLimitError("ham_cycle oracle limited to 12 vertices");
  if (n < 3) return false;
  auto adj = adjacency(g);
  std::vector<bool> used(n, false);
  used[0] = true;
  auto rec = [&](auto&& self, int at, size_t count) -> bool {
    if (count == n) return adj[at].count(0) > 0;
    for (int next : adj[at]) {
      if (used[next]) continue;
      used[next] = true;
      if (self(self, next, count + 1)) return true;
      used[next] = false;
    }
    return false;
  };
  return rec(rec, 0, 1);
}

bool graph_iso(const Graph& a, const Graph& b) {
  const size_t n = a.num_vertices();
  if (n > 12 || b.num_vertices() > 12)
    throw OracleLimitError("graph_iso oracle limited to 12 vertices");
  if (n != b.num_vertices() || a.num_edges() != b.num_edges()) return false;
  auto adja = adjacency(a);
  auto adjb = adjacency(b);
  std::vector<size_t> da, db;
  for (auto& s : adja) da.push_back(s.size());
  for (auto& s : adjb) db.push_back(s.size());
  {
    auto sa = da, sb = db;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb) return false;
  }
  std::vector<int> map(n, -1);
  std::vector<bool> used(n, false);
  auto rec = [&](auto&& self, size_t i) -> bool {
    if (i == n) return true;
    for (size_t j = 0; j < n; ++j) {
      if (used[j] || da[i] != db[j]) continue;
      bool ok = true;
      for (size_t k = 0; k < i && ok; ++k) {
        bool ea = adja[i].count(static_cast<int>(k)) > 0;
        bool eb = adjb[j].count(map[k]) > 0;
        if (ea != eb) ok = false;
      }
      if (!ok) continue;
      map[i] = static_cast<int>(j);
      used[j] = true;
      if (self(self, i + 1)) return true;
      used[j] = false;
      map[i] = -1;
    }
    return false;
  };
  return rec(rec, 0);
}

bool naive_group_member(const Perm& p, const std::vector<Perm>& gens) {
  AtomSet carrier = p.domain();
  for (const Perm& g : gens) {
    AtomSet d = g.domain();
    carrier.insert(d.begin(), d.end());
  }
  if (carrier.size() > 6) throw OracleLimitError("naive closure limited to 6 atoms");
  std::set<Perm> closure{Perm{}};
  std::vector<Perm> frontier{Perm{}};
  while (!frontier.empty()) {
    std::vector<Perm> next;
    for (const Perm& q : frontier)
      for (const Perm& g : gens) {
        Perm r = compose(g, q);
        if (closure.insert(r).second) next.push_back(r);
      }
    frontier = std::move(next);
  }
  return closure.count(p) > 0;
}

}  // namespace nomlet::oracle
