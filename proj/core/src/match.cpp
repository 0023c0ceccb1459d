#include "nomlet/match.hpp"

#include <algorithm>
#include <cassert>

#include "nomlet/alpha.hpp"
#include "nomlet/unify.hpp"

namespace nomlet {

namespace {

struct MState {
  std::vector<std::pair<Expr, Expr>> eqs;  // pattern <= ground target
  std::map<ExprVar, Expr> sigma;
};

struct Engine {
  const MatchOptions& opts;
  MatchResult& result;
  size_t entered = 0;
  bool overflow = false;
  std::set<std::string> seen;

  // true once the search should unwind
  bool done() const {
    return overflow || (!opts.collecting && !result.solutions.empty());
  }
};

bool process(Engine& eng, MState s);

// Binds X to a ground value; the merge rule compares with alpha_eq.
bool bind(MState& s, ExprVar x, Expr value) {
  auto it = s.sigma.find(x);
  if (it != s.sigma.end()) return alpha_eq(it->second, value);
  s.sigma.emplace(x, std::move(value));
  return true;
}

// ---- the letrec pairing search ----------------------------------------
//
// Matching (letrec a1.s1..an.sn in r) against pi . (letrec b1.t1..bn.tn in
// r') explores the pairing rho slot by slot. pi is forced on paired binders
// and on atoms compared during eager sub-matching, and completed canonically
// once the pairing is total. Sub-matches that would need parts of pi not yet
// determined are deferred to completion; variable bindings keep their raw
// target (a bijective renaming preserves alpha-equivalence, so raw targets
// under the same pending permutation can be merged early).

struct PendingVal {
  PermPtr pre;  // pattern-side inverse permutation
  Expr raw;     // un-renamed target subterm
};

struct LetrecDfs {
  std::vector<Binding> ls, rs;
  Expr lbody, rbody;
  AtomSet universe;  // pattern binders + target binders

  struct Aux {
    std::map<Atom, Atom> pi;  // target atom -> pattern atom (forced part)
    AtomSet images;
    std::vector<char> used;
    std::vector<char> done_slot;
    std::vector<std::pair<ExprVar, PendingVal>> values;
    std::vector<std::pair<Expr, Expr>> deferred;  // pattern <= pi . raw
  };
};

enum class MP { Ok, Fail };

// Eager sub-match of pattern against pi.raw with pi partially known.
// Undecidable comparisons defer the whole pair to completion.
MP match_pending(const LetrecDfs& d, LetrecDfs::Aux& aux, const Expr& p, const Expr& raw) {
  switch (p.kind()) {
    case ExprKind::Susp: {
      const auto& sp = as_susp(p);
      PendingVal pv{px_inverse(sp.perm, nullptr), raw};
      for (auto& [x, old] : aux.values) {
        if (!(x == sp.var)) continue;
        if (px_cmp(old.pre, pv.pre) == 0 && !alpha_eq(old.raw, pv.raw)) return MP::Fail;
      }
      aux.values.push_back({sp.var, std::move(pv)});
      return MP::Ok;
    }
    case ExprKind::WLeaf: {
      Atom c = w_as_atom(as_wleaf(p).w);
      if (raw.kind() != ExprKind::WLeaf) return MP::Fail;
      Atom dt = w_as_atom(as_wleaf(raw).w);
      auto it = aux.pi.find(dt);
      if (it != aux.pi.end()) return it->second == c ? MP::Ok : MP::Fail;
      if (d.universe.count(dt)) {
        if (!d.universe.count(c) || aux.images.count(c)) return MP::Fail;
        aux.pi.emplace(dt, c);
        aux.images.insert(c);
        return MP::Ok;
      }
      return c == dt ? MP::Ok : MP::Fail;  // outside dom(pi)
    }
    case ExprKind::Fun: {
      if (raw.kind() != ExprKind::Fun) return MP::Fail;
      const auto& fp = as_fun(p);
      const auto& ft = as_fun(raw);
      if (!(fp.sym == ft.sym) || fp.args.size() != ft.args.size()) return MP::Fail;
      for (size_t i = 0; i < fp.args.size(); ++i)
        if (match_pending(d, aux, fp.args[i], ft.args[i]) == MP::Fail) return MP::Fail;
      return MP::Ok;
    }
    case ExprKind::Lam: {
      if (raw.kind() != ExprKind::Lam) return MP::Fail;
      Atom a = w_as_atom(as_lam(p).binder);
      Atom dt = w_as_atom(as_lam(raw).binder);
      Atom dd = dt;  // image of the target binder when determined
      if (auto it = aux.pi.find(dt); it != aux.pi.end()) {
        dd = it->second;
      } else if (d.universe.count(dt)) {
        aux.deferred.push_back({p, raw});
        return MP::Ok;
      }
      if (a == dd) return match_pending(d, aux, as_lam(p).body, as_lam(raw).body);
      aux.deferred.push_back({p, raw});
      return MP::Ok;
    }
    case ExprKind::Letrec: {
      if (raw.kind() != ExprKind::Letrec) return MP::Fail;
      if (as_letrec(p).env.size() != as_letrec(raw).env.size()) return MP::Fail;
      aux.deferred.push_back({p, raw});
      return MP::Ok;
    }
  }
  return MP::Fail;
}

// Completes pi canonically, materializes the pending values, re-queues the
// deferred pairs, and continues the outer search. Returns true to unwind.
bool letrec_complete(Engine& eng, const LetrecDfs& d, const LetrecDfs::Aux& aux,
                     const MState& base) {
  AtomSet lefts, rights;
  for (const Binding& b : d.ls) lefts.insert(w_as_atom(b.binder));
  for (const Binding& b : d.rs) rights.insert(w_as_atom(b.binder));
  std::vector<std::pair<Atom, Atom>> forced(aux.pi.begin(), aux.pi.end());
  Perm pi = extend_binder_bijection(forced, lefts, rights);
  PermPtr pix = px_ground(pi);

  MState next = base;
  for (auto& [x, pv] : aux.values) {
    Expr value = apply_perm(pv.pre, apply_perm(pix, pv.raw));
    if (!bind(next, x, std::move(value))) return eng.done();
  }
  for (auto& [p, raw] : aux.deferred) next.eqs.push_back({p, apply_perm(pix, raw)});
  return process(eng, std::move(next));
}

bool letrec_dfs(Engine& eng, const LetrecDfs& d, const LetrecDfs::Aux& aux,
                const MState& base, size_t remaining) {
  if (eng.done()) return true;
  if (remaining == 0) return letrec_complete(eng, d, aux, base);
  const size_t n = d.ls.size();
  // most-constrained slot first
  size_t best = n;
  std::vector<size_t> best_js;
  for (size_t i = 0; i < n; ++i) {
    if (aux.done_slot[i]) continue;
    std::vector<size_t> js;
    Atom ai = w_as_atom(d.ls[i].binder);
    for (size_t j = 0; j < n; ++j) {
      if (aux.used[j]) continue;
      LetrecDfs::Aux trial = aux;
      Atom bj = w_as_atom(d.rs[j].binder);
      auto it = trial.pi.find(bj);
      if (it != trial.pi.end()) {
        if (!(it->second == ai)) continue;
      } else {
        if (trial.images.count(ai)) continue;
        trial.pi.emplace(bj, ai);
        trial.images.insert(ai);
      }
      if (match_pending(d, trial, d.ls[i].rhs, d.rs[j].rhs) == MP::Ok) js.push_back(j);
    }
    if (js.empty()) return eng.done();  // dead branch
    if (best == n || js.size() < best_js.size()) {
      best = i;
      best_js = std::move(js);
      if (best_js.size() == 1) break;
    }
  }
  assert(best < n);
  Atom ai = w_as_atom(d.ls[best].binder);
  for (size_t j : best_js) {
    LetrecDfs::Aux next = aux;
    next.done_slot[best] = 1;
    next.used[j] = 1;
    Atom bj = w_as_atom(d.rs[j].binder);
    if (auto it = next.pi.find(bj); it == next.pi.end()) {
      next.pi.emplace(bj, ai);
      next.images.insert(ai);
    }
    if (match_pending(d, next, d.ls[best].rhs, d.rs[j].rhs) != MP::Ok) continue;
    if (letrec_dfs(eng, d, next, base, remaining - 1)) return true;
  }
  return eng.done();
}

bool match_letrec_eq(Engine& eng, const Expr& pattern, const Expr& target,
                     const MState& base) {
  LetrecDfs d;
  for (const EnvItem& item : as_letrec(pattern).env)
    d.ls.push_back(std::get<Binding>(item));
  for (const EnvItem& item : as_letrec(target).env)
    d.rs.push_back(std::get<Binding>(item));
  if (d.ls.size() != d.rs.size()) return eng.done();
  d.lbody = as_letrec(pattern).body;
  d.rbody = as_letrec(target).body;
  for (const Binding& b : d.ls) d.universe.insert(w_as_atom(b.binder));
  for (const Binding& b : d.rs) d.universe.insert(w_as_atom(b.binder));

  // freshness side condition: every pattern binder fresh in the target
  AtomSet target_fa = free_atoms(target);
  for (const Binding& b : d.ls)
    if (target_fa.count(w_as_atom(b.binder))) return eng.done();

  LetrecDfs::Aux aux;
  aux.used.assign(d.rs.size(), 0);
  aux.done_slot.assign(d.ls.size(), 0);
  if (match_pending(d, aux, d.lbody, d.rbody) != MP::Ok) return eng.done();
  return letrec_dfs(eng, d, aux, base, d.ls.size());
}

// Applies rules to the equations depth-first; returns true to unwind.
bool process(Engine& eng, MState s) {
  if (eng.done()) return true;
  if (++eng.entered > eng.opts.budget) {
    eng.overflow = true;
    return true;
  }
  ++eng.result.stats.states_explored;
  while (!s.eqs.empty()) {
    auto [p, t] = s.eqs.back();
    s.eqs.pop_back();
    if (equal(p, t)) continue;
    switch (p.kind()) {
      case ExprKind::Susp: {
        const auto& sp = as_susp(p);
        Expr value = apply_perm(px_inverse(sp.perm, nullptr), t);
        if (!bind(s, sp.var, std::move(value))) return eng.done();
        continue;
      }
      case ExprKind::WLeaf:
        return eng.done();  // distinct atoms (equal handled above)
      case ExprKind::Fun: {
        if (t.kind() != ExprKind::Fun) return eng.done();
        const auto& fp = as_fun(p);
        const auto& ft = as_fun(t);
        if (!(fp.sym == ft.sym) || fp.args.size() != ft.args.size()) return eng.done();
        for (size_t i = 0; i < fp.args.size(); ++i)
          s.eqs.push_back({fp.args[i], ft.args[i]});
        continue;
      }
      case ExprKind::Lam: {
        if (t.kind() != ExprKind::Lam) return eng.done();
        Atom a = w_as_atom(as_lam(p).binder);
        Atom b = w_as_atom(as_lam(t).binder);
        if (a == b) {
          s.eqs.push_back({as_lam(p).body, as_lam(t).body});
          continue;
        }
        // fails when the pattern binder occurs free in the target body
        if (free_atoms(as_lam(t).body).count(a)) return eng.done();
        s.eqs.push_back({as_lam(p).body, apply_perm(Perm::swap(a, b), as_lam(t).body)});
        continue;
      }
      case ExprKind::Letrec: {
        if (t.kind() != ExprKind::Letrec) return eng.done();
        return match_letrec_eq(eng, p, t, s);
      }
    }
  }
  // solved
  MatchSolution sol{s.sigma};
  std::string key = print_match_solution(sol);
  if (eng.seen.insert(key).second) eng.result.solutions.push_back(std::move(sol));
  return eng.done();
}

}  // namespace

MatchResult letrec_match(const MatchProblemFile& problem, const MatchOptions& opts) {
  MatchResult result;
  result.status = MatchStatus::Unsat;
  Engine eng{opts, result};

  MState root;
  for (auto& [p, t] : problem.equations) root.eqs.push_back({p, t});
  std::reverse(root.eqs.begin(), root.eqs.end());
  process(eng, std::move(root));

  if (eng.overflow)
    result.status = MatchStatus::Overflow;
  else if (!result.solutions.empty())
    result.status = MatchStatus::Sat;
  return result;
}

std::string print_match_solution(const MatchSolution& s) {
  std::string out = "(match-subst (theta";
  for (auto& [x, e] : s.subst)
    out += " (?" + std::string(x.name()) + " " + print_expr(e) + ")";
  out += "))";
  return out;
}

namespace {

Expr fun0(Signature& sig, const std::string& name) {
  FunSym f = mk_fun(name);
  sig.declare(f, 0);
  return mk_fun(f, {});
}

Expr fun_n(Signature& sig, const std::string& name, std::vector<Expr> args) {
  FunSym f = mk_fun(name);
  sig.declare(f, args.size());
  return mk_fun(f, std::move(args));
}

}  // namespace

MatchProblemFile encode_hamiltonian(const Graph& g) {
  auto deg = regular_degree(g);
  if (!deg || *deg != 3)
    throw std::invalid_argument("hamiltonian encoder needs a 3-regular graph");
  const size_t n = g.num_vertices();
  MatchProblemFile out;

  // target: letrec  v_i.(node v_i) ; two bindings per edge  in (0)
  std::vector<EnvItem> tenv;
  std::vector<Atom> node_atoms;
  for (size_t i = 0; i < n; ++i) node_atoms.push_back(mk_atom("v" + std::to_string(i)));
  for (size_t i = 0; i < n; ++i)
    tenv.push_back(Binding{w_atom(node_atoms[i]),
                           fun_n(out.sig, "node", {mk_atom_leaf(node_atoms[i])})});
  for (size_t k = 0; k < g.edges.size(); ++k) {
    auto [u, w] = g.edges[k];
    tenv.push_back(Binding{w_atom(mk_atom("ea" + std::to_string(k))),
                           fun_n(out.sig, "f",
                                 {mk_atom_leaf(node_atoms[u]), mk_atom_leaf(node_atoms[w])})});
    tenv.push_back(Binding{w_atom(mk_atom("eb" + std::to_string(k))),
                           fun_n(out.sig, "f",
                                 {mk_atom_leaf(node_atoms[w]), mk_atom_leaf(node_atoms[u])})});
  }
  Expr target = mk_letrec(std::move(tenv), fun0(out.sig, "0"));

  // pattern: node part with variables, a cycle part, and 3n - n dummies
  std::vector<EnvItem> penv;
  std::vector<Expr> xs;
  for (size_t i = 0; i < n; ++i) xs.push_back(mk_var(mk_expr_var("X" + std::to_string(i))));
  for (size_t i = 0; i < n; ++i)
    penv.push_back(Binding{w_atom(mk_atom("p" + std::to_string(i))),
                           fun_n(out.sig, "node", {xs[i]})});
  for (size_t i = 0; i < n; ++i)
    penv.push_back(Binding{w_atom(mk_atom("c" + std::to_string(i))),
                           fun_n(out.sig, "f", {xs[i], xs[(i + 1) % n]})});
  const size_t dummies = 2 * g.edges.size() - n;
  for (size_t k = 0; k < dummies; ++k) {
    Expr za = mk_var(mk_expr_var("Za" + std::to_string(k)));
    Expr zb = mk_var(mk_expr_var("Zb" + std::to_string(k)));
    penv.push_back(Binding{w_atom(mk_atom("d" + std::to_string(k))),
                           fun_n(out.sig, "f", {za, zb})});
  }
  Expr pattern = mk_letrec(std::move(penv), fun0(out.sig, "0"));

  out.equations.push_back({pattern, target});
  return out;
}

namespace {

// Graph-to-environment encoding shared by the isomorphism encoder: nodes
// a_i.(node a_i) and, per edge, both orientations of (edge a_k a_l).
std::vector<EnvItem> graph_env(Signature& sig, const Graph& g, const std::string& node_prefix,
                               const std::string& edge_prefix, std::vector<Atom>& edge_binders) {
  std::vector<EnvItem> env;
  std::vector<Atom> nodes;
  for (size_t i = 0; i < g.num_vertices(); ++i)
    nodes.push_back(mk_atom(node_prefix + std::to_string(i)));
  for (size_t i = 0; i < g.num_vertices(); ++i)
    env.push_back(Binding{w_atom(nodes[i]), fun_n(sig, "node", {mk_atom_leaf(nodes[i])})});
  for (size_t k = 0; k < g.edges.size(); ++k) {
    auto [u, w] = g.edges[k];
    Atom ba = mk_atom(edge_prefix + "a" + std::to_string(k));
    Atom bb = mk_atom(edge_prefix + "b" + std::to_string(k));
    edge_binders.push_back(ba);
    edge_binders.push_back(bb);
    env.push_back(Binding{w_atom(ba), fun_n(sig, "edge",
                                            {mk_atom_leaf(nodes[u]), mk_atom_leaf(nodes[w])})});
    env.push_back(Binding{w_atom(bb), fun_n(sig, "edge",
                                            {mk_atom_leaf(nodes[w]), mk_atom_leaf(nodes[u])})});
  }
  return env;
}

}  // namespace

MatchProblemFile encode_graph_iso(const Graph& g1, const Graph& g2) {
  auto d1 = regular_degree(g1);
  auto d2 = regular_degree(g2);
  if (!d1 || !d2 || *d1 < 1 || *d2 < 1)
    throw std::invalid_argument("isomorphism encoder needs regular graphs of degree >= 1");
  if (g1.num_vertices() != g2.num_vertices() || g1.num_edges() != g2.num_edges())
    throw std::invalid_argument("isomorphism encoder needs equal vertex and edge counts");

  MatchProblemFile out;
  std::vector<Atom> t_edge_binders;
  std::vector<EnvItem> tenv = graph_env(out.sig, g1, "a", "e", t_edge_binders);
  std::vector<Expr> body_args;
  for (Atom b : t_edge_binders) body_args.push_back(mk_atom_leaf(b));
  Expr target = mk_letrec(std::move(tenv), fun_n(out.sig, "g", std::move(body_args)));

  std::vector<Atom> p_edge_binders;
  std::vector<EnvItem> penv = graph_env(out.sig, g2, "b", "h", p_edge_binders);
  Expr pattern = mk_letrec(std::move(penv), mk_var(mk_expr_var("X")));

  out.equations.push_back({pattern, target});
  return out;
}

}  // namespace nomlet
