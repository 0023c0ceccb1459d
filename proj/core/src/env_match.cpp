#include "nomlet/env_match.hpp"

#include <algorithm>
#include <cassert>

#include "nomlet/alpha.hpp"
#include "nomlet/freshness.hpp"

namespace nomlet {

namespace {

// ---- substitution of an atom variable by a suspended atom (W) ----
// Only the swapping-list form occurs here (matching never compresses).

W w_subst_avar_w(const W& w, AtomVar a, const W& value);

PermPtr px_subst_avar_w(const PermPtr& p, AtomVar a, const W& value) {
  if (!p || p->is_ground()) return p;
  const auto& swaps = std::get<PermX::Swaps>(p->rep()).list;
  std::vector<SwapW> out;
  out.reserve(swaps.size());
  for (const SwapW& s : swaps)
    out.push_back(SwapW{w_subst_avar_w(s.lhs, a, value), w_subst_avar_w(s.rhs, a, value)});
  return px_swaps(std::move(out));
}

W w_subst_avar_w(const W& w, AtomVar a, const W& value) {
  PermPtr perm = px_subst_avar_w(w.perm, a, value);
  if (!is_atom(w.v) && std::get<AtomVar>(w.v) == a)
    return mk_w(px_compose(perm, value.perm, nullptr), value.v, nullptr);
  return mk_w(std::move(perm), w.v, nullptr);
}

Expr subst_avar_w(const Expr& e, AtomVar a, const W& value) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
      return mk_wleaf(w_subst_avar_w(as_wleaf(e).w, a, value));
    case ExprKind::Susp:
      return mk_susp(px_subst_avar_w(as_susp(e).perm, a, value), as_susp(e).var);
    case ExprKind::Lam:
      return mk_lam(w_subst_avar_w(as_lam(e).binder, a, value),
                    subst_avar_w(as_lam(e).body, a, value));
    case ExprKind::Fun: {
      std::vector<Expr> args;
      for (const Expr& x : as_fun(e).args) args.push_back(subst_avar_w(x, a, value));
      return mk_fun(as_fun(e).sym, std::move(args));
    }
    case ExprKind::Letrec: {
      std::vector<EnvItem> env;
      for (const EnvItem& item : as_letrec(e).env) {
        if (auto* b = std::get_if<Binding>(&item))
          env.push_back(Binding{w_subst_avar_w(b->binder, a, value),
                                subst_avar_w(b->rhs, a, value)});
        else {
          const auto& ev = std::get<SuspEnvVar>(item);
          env.push_back(SuspEnvVar{px_subst_avar_w(ev.perm, a, value), ev.var});
        }
      }
      return mk_letrec(std::move(env), subst_avar_w(as_letrec(e).body, a, value));
    }
  }
  return e;
}

// ---- substitution of an environment variable by a binding template ----

Expr subst_env_var(const Expr& e, EnvVar ev, const std::vector<Binding>& items) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
    case ExprKind::Susp:
      return e;
    case ExprKind::Lam:
      return mk_lam(as_lam(e).binder, subst_env_var(as_lam(e).body, ev, items));
    case ExprKind::Fun: {
      std::vector<Expr> args;
      for (const Expr& x : as_fun(e).args) args.push_back(subst_env_var(x, ev, items));
      return mk_fun(as_fun(e).sym, std::move(args));
    }
    case ExprKind::Letrec: {
      std::vector<EnvItem> env;
      for (const EnvItem& item : as_letrec(e).env) {
        if (auto* b = std::get_if<Binding>(&item)) {
          env.push_back(Binding{b->binder, subst_env_var(b->rhs, ev, items)});
          continue;
        }
        const auto& sv = std::get<SuspEnvVar>(item);
        if (!(sv.var == ev)) {
          env.push_back(item);
          continue;
        }
        for (const Binding& b : items)
          env.push_back(Binding{mk_w(px_compose(sv.perm, b.binder.perm, nullptr),
                                     b.binder.v, nullptr),
                                apply_perm(sv.perm, b.rhs)});
      }
      return mk_letrec(std::move(env), subst_env_var(as_letrec(e).body, ev, items));
    }
  }
  return e;
}

struct EState {
  std::vector<std::pair<Expr, Expr>> eqs;  // pattern <= ground target
  FreshnessContext nabla;
  std::vector<std::pair<ExprVar, Expr>> values;  // possibly stuck on atom vars
  std::map<EnvVar, std::vector<Binding>> env_templates;
};

void subst_avar_state(EState& s, AtomVar a, const W& value) {
  for (auto& [p, t] : s.eqs) p = subst_avar_w(p, a, value);
  for (auto& [x, v] : s.values) v = subst_avar_w(v, a, value);
  for (auto& [ev, items] : s.env_templates)
    for (Binding& b : items) {
      b.binder = w_subst_avar_w(b.binder, a, value);
      b.rhs = subst_avar_w(b.rhs, a, value);
    }
  FreshnessContext nb;
  nb.bot = s.nabla.bot;
  nb.atomic = s.nabla.atomic;
  for (const Freshness& f : s.nabla.suspended)
    add_constraint(nb, Freshness{w_subst_avar_w(f.subject, a, value),
                                 subst_avar_w(f.target, a, value)});
  for (const FreshEq& eq : s.nabla.equalities)
    add_equality(nb, FreshEq{w_subst_avar_w(eq.lhs, a, value),
                             w_subst_avar_w(eq.rhs, a, value)});
  s.nabla = std::move(nb);
}

void inject_distinctness_pattern(const Expr& e, FreshnessContext& ctx) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
    case ExprKind::Susp:
      return;
    case ExprKind::Lam:
      inject_distinctness_pattern(as_lam(e).body, ctx);
      return;
    case ExprKind::Fun:
      for (const Expr& a : as_fun(e).args) inject_distinctness_pattern(a, ctx);
      return;
    case ExprKind::Letrec: {
      std::vector<const Binding*> bs;
      for (const EnvItem& item : as_letrec(e).env)
        if (auto* b = std::get_if<Binding>(&item)) bs.push_back(b);
      for (size_t i = 0; i < bs.size(); ++i)
        for (size_t j = i + 1; j < bs.size(); ++j)
          add_constraint(ctx, Freshness{bs[i]->binder, mk_wleaf(bs[j]->binder)});
      for (const Binding* b : bs) inject_distinctness_pattern(b->rhs, ctx);
      inject_distinctness_pattern(as_letrec(e).body, ctx);
      return;
    }
  }
}

struct Engine {
  const MatchOptions& opts;
  EnvMatchResult& result;
  const std::vector<std::pair<Expr, Expr>>& problem_eqs;
  FreshVars& fresh;
  std::vector<EState> stack;
  size_t entered = 0;
  bool overflow = false;
  std::set<std::string> seen;

  void push(EState s) {
    if (entered >= opts.budget) {
      overflow = true;
      return;
    }
    ++entered;
    stack.push_back(std::move(s));
  }
};

Expr ground_with(const Expr& e, const std::map<AtomVar, Atom>& assign) {
  Expr out = e;
  for (auto& [av, at] : assign) out = subst_atom_var(out, av, at);
  return out;
}

// Resolves the remaining atom variables against nabla and emits ground
// solutions; every candidate is verified against the original equations.
void emit_solutions(Engine& eng, const EState& s) {
  std::set<AtomVar> avars;
  AtomSet atoms;
  for (const Freshness& f : s.nabla.suspended) {
    w_collect_atom_vars(f.subject, nullptr, avars);
    collect_atom_vars(f.target, nullptr, avars);
  }
  for (const FreshEq& eq : s.nabla.equalities) {
    w_collect_atom_vars(eq.lhs, nullptr, avars);
    w_collect_atom_vars(eq.rhs, nullptr, avars);
  }
  for (auto& [x, v] : s.values) collect_atom_vars(v, nullptr, avars);
  for (auto& [ev, items] : s.env_templates)
    for (const Binding& b : items) {
      w_collect_atom_vars(b.binder, nullptr, avars);
      collect_atom_vars(b.rhs, nullptr, avars);
    }
  for (auto& [p, t] : eng.problem_eqs) {
    collect_atoms(p, nullptr, atoms);
    collect_atoms(t, nullptr, atoms);
  }
  for (const AtomicFreshness& af : s.nabla.atomic) atoms.insert(af.atom);

  std::vector<AtomVar> vars(avars.begin(), avars.end());
  std::vector<Atom> pool(atoms.begin(), atoms.end());
  AtomSet avoid = atoms;
  for (size_t i = 0; i < vars.size(); ++i) {
    Atom fa = fresh_atom(avoid);
    avoid.insert(fa);
    pool.push_back(fa);
  }

  std::map<AtomVar, Atom> assign;
  auto rec = [&](auto&& self, size_t i, const FreshnessContext& ctx) -> void {
    if (ctx.bot) return;
    if (i == vars.size()) {
      EnvMatchSolution sol;
      std::map<ExprVar, Expr> images;
      for (auto& [x, v] : s.values) {
        Expr gv = ground_with(v, assign);
        if (!is_ground(gv)) return;
        auto it = images.find(x);
        if (it != images.end()) {
          if (!alpha_eq(it->second, gv)) return;  // merge check
        } else {
          images.emplace(x, gv);
        }
      }
      for (auto& [ev, items] : s.env_templates) {
        std::vector<Binding> ground_items;
        for (const Binding& b : items) {
          Expr gb = ground_with(mk_wleaf(b.binder), assign);
          Expr gr = ground_with(b.rhs, assign);
          std::set<ExprVar> vs;
          collect_expr_vars(gr, vs);
          for (ExprVar x : vs) {
            auto it = images.find(x);
            if (it == images.end()) return;
            gr = subst_var(gr, x, it->second);
          }
          if (!is_ground(gb) || !is_ground(gr)) return;
          ground_items.push_back(Binding{w_atom(w_as_atom(as_wleaf(gb).w)), gr});
        }
        sol.env_images.emplace(ev, std::move(ground_items));
      }
      for (auto& [p, t] : eng.problem_eqs) {
        Expr inst = p;
        for (auto& [ev, items] : sol.env_images) inst = subst_env_var(inst, ev, items);
        inst = ground_with(inst, assign);
        for (auto& [x, v] : images) inst = subst_var(inst, x, v);
        if (!is_ground(inst) || !alpha_eq(inst, t)) return;
      }
      sol.var_images = std::move(images);
      sol.atom_images = assign;
      std::string key = print_env_match_solution(sol);
      if (eng.seen.insert(key).second) eng.result.solutions.push_back(std::move(sol));
      return;
    }
    for (Atom a : pool) {
      FreshnessContext next = ctx;
      subst_atom_var_ctx(next, vars[i], a);
      assign[vars[i]] = a;
      self(self, i + 1, next);
      assign.erase(vars[i]);
      if (!eng.opts.collecting && !eng.result.solutions.empty()) return;
    }
  };
  rec(rec, 0, s.nabla);
}

std::vector<Binding> plain_bindings(const Expr& e) {
  std::vector<Binding> out;
  for (const EnvItem& item : as_letrec(e).env) out.push_back(std::get<Binding>(item));
  return out;
}

FunSym tuple_sym(size_t n) { return mk_fun("tuple" + std::to_string(n)); }

// Rule (7): pairing branches; swappings accumulate on the pattern side.
void letrec_rule7(Engine& eng, const EState& base, const Expr& pattern, const Expr& target) {
  auto ls = plain_bindings(pattern);
  auto rs = plain_bindings(target);
  if (ls.size() != rs.size()) return;
  const size_t n = ls.size();
  std::vector<size_t> rho(n);
  for (size_t i = 0; i < n; ++i) rho[i] = i;
  do {
    EState c = base;
    PermPtr sigma = nullptr;  // accumulated pattern-side renaming
    bool dead = false;
    for (size_t k = 0; k < n && !dead; ++k) {
      W wl = mk_w(px_compose(sigma, ls[k].binder.perm, nullptr), ls[k].binder.v, nullptr);
      Atom ak = w_as_atom(rs[rho[k]].binder);
      if (w_is_atom(wl) && w_as_atom(wl) == ak) continue;  // rule (5) level
      // rule (6) level: a # lam W.(sigma . pattern rest)
      std::vector<Expr> tuple_args;
      for (size_t i = 0; i < n; ++i) tuple_args.push_back(ls[i].rhs);
      tuple_args.push_back(as_letrec(pattern).body);
      Expr rest = mk_fun(tuple_sym(n + 1), std::move(tuple_args));
      for (size_t i = n; i-- > k + 1;) rest = mk_lam(ls[i].binder, rest);
      Expr fr_target = mk_lam(wl, apply_perm(sigma, rest));
      add_constraint(c.nabla, Freshness{w_atom(ak), fr_target});
      if (c.nabla.bot) dead = true;
      sigma = px_compose(px_swap(wl, w_atom(ak)), sigma, nullptr);
    }
    if (dead) continue;
    for (size_t i = 0; i < n; ++i)
      c.eqs.push_back({apply_perm(sigma, ls[i].rhs), rs[rho[i]].rhs});
    c.eqs.push_back({apply_perm(sigma, as_letrec(pattern).body), as_letrec(target).body});
    eng.push(std::move(c));
  } while (std::next_permutation(rho.begin(), rho.end()));
}

// Rule (8): guesses a binding template A1.X1;...;Ak.Xk for each environment
// variable of the equation, k bounded by the target's slack.
void letrec_rule8(Engine& eng, const EState& base, const std::pair<Expr, Expr>& eq) {
  const auto& penv = as_letrec(eq.first).env;
  const auto& tenv = as_letrec(eq.second).env;
  size_t explicit_n = 0;
  std::map<EnvVar, size_t> mult;
  for (const EnvItem& item : penv) {
    if (std::holds_alternative<Binding>(item))
      ++explicit_n;
    else
      ++mult[std::get<SuspEnvVar>(item).var];
  }
  const size_t m = tenv.size();
  if (m < explicit_n) return;  // binding-count clash
  const size_t slack = m - explicit_n;

  std::vector<std::pair<EnvVar, size_t>> evs(mult.begin(), mult.end());
  std::vector<size_t> ks(evs.size(), 0);
  auto rec = [&](auto&& self, size_t idx, size_t remaining) -> void {
    if (idx == evs.size()) {
      if (remaining != 0) return;
      EState c = base;
      c.eqs.push_back(eq);  // the letrec equation is kept and reprocessed
      for (size_t v = 0; v < evs.size(); ++v) {
        std::vector<Binding> items;
        for (size_t k = 0; k < ks[v]; ++k) {
          AtomVar av = eng.fresh.make_atom_var();
          ExprVar xv = eng.fresh.make();
          items.push_back(Binding{w_avar(av), mk_var(xv)});
        }
        for (auto& [p, t] : c.eqs) p = subst_env_var(p, evs[v].first, items);
        FreshnessContext nb;
        nb.bot = c.nabla.bot;
        nb.atomic = c.nabla.atomic;
        for (const Freshness& f : c.nabla.suspended)
          add_constraint(nb,
                         Freshness{f.subject, subst_env_var(f.target, evs[v].first, items)});
        for (const FreshEq& e2 : c.nabla.equalities) add_equality(nb, e2);
        c.nabla = std::move(nb);
        c.env_templates[evs[v].first] = items;
      }
      for (auto& [p, t] : c.eqs) inject_distinctness_pattern(p, c.nabla);
      if (!c.nabla.bot) eng.push(std::move(c));
      return;
    }
    size_t step = evs[idx].second;  // occurrences of this variable
    for (size_t k = 0; step * k <= remaining; ++k) {
      ks[idx] = k;
      self(self, idx + 1, remaining - step * k);
    }
  };
  rec(rec, 0, slack);
}

void process(Engine& eng, EState s) {
  while (!s.eqs.empty()) {
    auto [p, t] = s.eqs.back();
    s.eqs.pop_back();
    if (equal(p, t)) continue;
    switch (p.kind()) {
      case ExprKind::Susp: {
        const auto& sp = as_susp(p);
        Expr value = apply_perm(px_inverse(sp.perm, nullptr), t);
        for (auto& [x, v] : s.values)
          if (x == sp.var && is_ground(v) && is_ground(value) && !alpha_eq(v, value))
            return;  // eager merge failure
        s.values.push_back({sp.var, std::move(value)});
        continue;
      }
      case ExprKind::WLeaf: {
        if (t.kind() != ExprKind::WLeaf) return;
        const W& wp = as_wleaf(p).w;
        Atom a = w_as_atom(as_wleaf(t).w);
        if (w_is_atom(wp)) return;  // distinct atoms
        if (!is_atom(wp.v)) {
          AtomVar av = std::get<AtomVar>(wp.v);
          W value = mk_w(px_inverse(wp.perm, nullptr), VarOrAtom{a}, nullptr);
          std::set<AtomVar> in_value;
          w_collect_atom_vars(value, nullptr, in_value);
          if (!in_value.count(av)) {
            subst_avar_state(s, av, value);
            if (s.nabla.bot) return;
            continue;
          }
        }
        // subject stuck or self-referential: keep as an equality constraint
        add_equality(s.nabla,
                     FreshEq{W{nullptr, wp.v},
                             mk_w(px_inverse(wp.perm, nullptr), VarOrAtom{a}, nullptr)});
        if (s.nabla.bot) return;
        continue;
      }
      case ExprKind::Fun: {
        if (t.kind() != ExprKind::Fun) return;
        const auto& fp = as_fun(p);
        const auto& ft = as_fun(t);
        if (!(fp.sym == ft.sym) || fp.args.size() != ft.args.size()) return;
        for (size_t i = 0; i < fp.args.size(); ++i) s.eqs.push_back({fp.args[i], ft.args[i]});
        continue;
      }
      case ExprKind::Lam: {
        if (t.kind() != ExprKind::Lam) return;
        const W& wp = as_lam(p).binder;
        Atom a = w_as_atom(as_lam(t).binder);
        if (w_is_atom(wp) && w_as_atom(wp) == a) {
          s.eqs.push_back({as_lam(p).body, as_lam(t).body});
          continue;
        }
        // rule (6): (W a).e1 <= e2 with a # lam W.e1
        add_constraint(s.nabla, Freshness{w_atom(a), p});
        if (s.nabla.bot) return;
        s.eqs.push_back({apply_perm(px_swap(wp, w_atom(a)), as_lam(p).body),
                         as_lam(t).body});
        continue;
      }
      case ExprKind::Letrec: {
        if (t.kind() != ExprKind::Letrec) return;
        bool has_ev = false;
        for (const EnvItem& item : as_letrec(p).env)
          if (std::holds_alternative<SuspEnvVar>(item)) has_ev = true;
        if (has_ev)
          letrec_rule8(eng, s, {p, t});
        else
          letrec_rule7(eng, s, p, t);
        return;
      }
    }
  }
  emit_solutions(eng, s);
}

}  // namespace

EnvMatchResult env_match(const MatchProblemFile& problem, const MatchOptions& opts) {
  EnvMatchResult result;
  result.status = MatchStatus::Unsat;

  uint64_t start = 1;
  {
    std::set<ExprVar> vars;
    for (auto& [l, r] : problem.equations) {
      collect_expr_vars(l, vars);
      collect_expr_vars(r, vars);
    }
    for (ExprVar v : vars) {
      std::string_view n = v.name();
      if (n.size() > 2 && n.substr(0, 2) == "_F") {
        uint64_t k = 0;
        bool num = true;
        for (char ch : n.substr(2)) {
          if (ch < '0' || ch > '9') {
            num = false;
            break;
          }
          k = k * 10 + (ch - '0');
        }
        if (num && k + 1 > start) start = k + 1;
      }
    }
  }
  FreshVars fresh(start);
  Engine eng{opts, result, problem.equations, fresh};

  EState root;
  for (auto& [p, t] : problem.equations) {
    root.eqs.push_back({p, t});
    inject_distinctness_pattern(p, root.nabla);
  }
  std::reverse(root.eqs.begin(), root.eqs.end());
  if (!root.nabla.bot) eng.push(std::move(root));

  while (!eng.stack.empty() && !eng.overflow) {
    EState s = std::move(eng.stack.back());
    eng.stack.pop_back();
    ++result.states_explored;
    process(eng, std::move(s));
    if (!opts.collecting && !result.solutions.empty()) break;
  }

  if (eng.overflow)
    result.status = MatchStatus::Overflow;
  else if (!result.solutions.empty())
    result.status = MatchStatus::Sat;
  return result;
}

std::string print_env_match_solution(const EnvMatchSolution& s) {
  std::string out = "(match-subst (theta";
  for (auto& [x, e] : s.var_images)
    out += " (?" + std::string(x.name()) + " " + print_expr(e) + ")";
  for (auto& [av, a] : s.atom_images)
    out += " (@" + std::string(av.name()) + " " + std::string(a.name()) + ")";
  out += ") (envs";
  for (auto& [ev, items] : s.env_images) {
    out += " (%" + std::string(ev.name()) + " (";
    bool first = true;
    for (const Binding& b : items) {
      if (!first) out += " ";
      first = false;
      out += "(" + print_w(b.binder) + " " + print_expr(b.rhs) + ")";
    }
    out += "))";
  }
  out += "))";
  return out;
}

}  // namespace nomlet
