#include "nomlet/unify_av.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "nomlet/permgroup.hpp"

namespace nomlet {

double StrategyP::operator()(size_t s) const {
  double x = static_cast<double>(s);
  double cap = x * x;
  double v = 0;
  switch (kind) {
    case Kind::NLogN:
      v = x * std::log2(x + 2);
      break;
    case Kind::Quadratic:
      v = x * x;
      break;
    case Kind::Constant:
      v = static_cast<double>(constant_k);
      break;
  }
  return std::min(v, cap);
}

StrategyP StrategyP::parse(const std::string& name) {
  StrategyP p;
  if (name == "nlogn") {
    p.kind = Kind::NLogN;
  } else if (name == "quadratic") {
    p.kind = Kind::Quadratic;
  } else if (name.rfind("constant:", 0) == 0) {
    p.kind = Kind::Constant;
    p.constant_k = std::stoul(name.substr(9));
  } else {
    throw std::invalid_argument("unknown strategy '" + name + "'");
  }
  return p;
}

std::string StrategyP::name() const {
  switch (kind) {
    case Kind::NLogN:
      return "nlogn";
    case Kind::Quadratic:
      return "quadratic";
    case Kind::Constant:
      return "constant:" + std::to_string(constant_k);
  }
  return "?";
}

namespace {

bool is_susp(const Expr& e) { return e.kind() == ExprKind::Susp; }
bool is_wleaf(const Expr& e) { return e.kind() == ExprKind::WLeaf; }

struct AvState {
  std::vector<Equation> eqs;
  FreshnessContext nabla;
  std::vector<Assignment> theta;
  std::vector<std::pair<AtomVar, Atom>> atom_theta;
  size_t rule_apps = 0;
};

struct AvCtx {
  PermGrammar* g;
  size_t input_size = 0;
  double p_s = 0;
  // what ElimAB is guaranteed to reduce a family to: p(S) when p is at
  // least x log x, and the group-theoretic S log S floor otherwise
  double elimab_bound = 0;
  AvStats* stats = nullptr;
};

Equation orient_av(Expr l, Expr r) {
  // variable suspensions first, then W leaves, then the rest
  auto rank = [](const Expr& e) {
    if (is_susp(e)) return 0;
    if (is_wleaf(e)) return 1;
    return 2;
  };
  if (rank(r) < rank(l)) std::swap(l, r);
  return Equation{std::move(l), std::move(r)};
}

// ---- flattening: every proper subterm position becomes a suspension ----

Expr av_flatten_node(const Expr& e, std::vector<Equation>& defs, FreshVars& fresh);

Expr av_flat_child(const Expr& c, std::vector<Equation>& defs, FreshVars& fresh) {
  if (is_susp(c)) return c;
  Expr inner = av_flatten_node(c, defs, fresh);
  ExprVar x = fresh.make();
  defs.push_back(Equation{mk_var(x), inner});
  return mk_var(x);
}

Expr av_flatten_node(const Expr& e, std::vector<Equation>& defs, FreshVars& fresh) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
    case ExprKind::Susp:
      return e;
    case ExprKind::Lam:
      return mk_lam(as_lam(e).binder, av_flat_child(as_lam(e).body, defs, fresh));
    case ExprKind::Fun: {
      std::vector<Expr> args;
      for (const Expr& a : as_fun(e).args) args.push_back(av_flat_child(a, defs, fresh));
      return mk_fun(as_fun(e).sym, std::move(args));
    }
    case ExprKind::Letrec: {
      std::vector<EnvItem> env;
      for (const EnvItem& item : as_letrec(e).env) {
        const auto& b = std::get<Binding>(item);
        env.push_back(Binding{b.binder, av_flat_child(b.rhs, defs, fresh)});
      }
      return mk_letrec(std::move(env), av_flat_child(as_letrec(e).body, defs, fresh));
    }
  }
  return e;
}

// Interns every non-ground suspended permutation into the grammar.
Expr normalize_perms(const Expr& e, PermGrammar& g) {
  auto norm_px = [&](const PermPtr& p) -> PermPtr {
    if (!p || p->is_ground()) return p;
    return px_nt(g.intern(p), g);
  };
  auto norm_w = [&](const W& w) { return W{norm_px(w.perm), w.v}; };
  switch (e.kind()) {
    case ExprKind::WLeaf:
      return mk_wleaf(norm_w(as_wleaf(e).w));
    case ExprKind::Susp:
      return mk_susp(norm_px(as_susp(e).perm), as_susp(e).var);
    case ExprKind::Lam:
      return mk_lam(norm_w(as_lam(e).binder), normalize_perms(as_lam(e).body, g));
    case ExprKind::Fun: {
      std::vector<Expr> args;
      for (const Expr& a : as_fun(e).args) args.push_back(normalize_perms(a, g));
      return mk_fun(as_fun(e).sym, std::move(args));
    }
    case ExprKind::Letrec: {
      std::vector<EnvItem> env;
      for (const EnvItem& item : as_letrec(e).env) {
        const auto& b = std::get<Binding>(item);
        env.push_back(Binding{norm_w(b.binder), normalize_perms(b.rhs, g)});
      }
      return mk_letrec(std::move(env), normalize_perms(as_letrec(e).body, g));
    }
  }
  return e;
}

// Binder-distinctness constraints W_i # W_j for every letrec in the input.
void inject_distinctness(const Expr& e, std::vector<Freshness>& out) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
    case ExprKind::Susp:
      return;
    case ExprKind::Lam:
      inject_distinctness(as_lam(e).body, out);
      return;
    case ExprKind::Fun:
      for (const Expr& a : as_fun(e).args) inject_distinctness(a, out);
      return;
    case ExprKind::Letrec: {
      std::vector<const Binding*> bs;
      for (const EnvItem& item : as_letrec(e).env) bs.push_back(&std::get<Binding>(item));
      for (size_t i = 0; i < bs.size(); ++i)
        for (size_t j = i + 1; j < bs.size(); ++j)
          out.push_back(Freshness{bs[i]->binder, mk_wleaf(bs[j]->binder)});
      for (const Binding* b : bs) inject_distinctness(b->rhs, out);
      inject_distinctness(as_letrec(e).body, out);
      return;
    }
  }
}

std::vector<Binding> letrec_bindings(const Expr& e) {
  std::vector<Binding> out;
  for (const EnvItem& item : as_letrec(e).env) out.push_back(std::get<Binding>(item));
  return out;
}

// ---- decomposition ----

struct AvDecomposed {
  bool clash = false;
  bool letrec = false;
  std::vector<Equation> eqs;
  std::vector<Freshness> fresh;
};

// Adds an equation, dropping trivial pairs; returns false on an immediate
// atom clash (keeps the termination measure strictly decreasing).
bool add_av_eq(std::vector<Equation>& out, Expr l, Expr r) {
  if (equal(l, r)) return true;
  if (is_wleaf(l) && is_wleaf(r)) {
    const W& wl = as_wleaf(l).w;
    const W& wr = as_wleaf(r).w;
    if (w_is_atom(wl) && w_is_atom(wr) && !(w_as_atom(wl) == w_as_atom(wr))) return false;
  }
  out.push_back(orient_av(std::move(l), std::move(r)));
  return true;
}

// Rules (4),(5),(6) on constructor pairs.
AvDecomposed decompose_av(const Expr& l, const Expr& r, AvCtx& cx) {
  AvDecomposed d;
  if (equal(l, r)) return d;
  if (l.kind() != r.kind()) {
    d.clash = true;
    return d;
  }
  switch (l.kind()) {
    case ExprKind::Fun: {
      const auto& fl = as_fun(l);
      const auto& fr = as_fun(r);
      if (!(fl.sym == fr.sym) || fl.args.size() != fr.args.size()) {
        d.clash = true;
        return d;
      }
      for (size_t i = 0; i < fl.args.size(); ++i)
        if (!add_av_eq(d.eqs, fl.args[i], fr.args[i])) {
          d.clash = true;
          return d;
        }
      return d;
    }
    case ExprKind::Lam: {
      const W& wl = as_lam(l).binder;
      const W& wr = as_lam(r).binder;
      if (w_equal(wl, wr)) {
        d.clash = !add_av_eq(d.eqs, as_lam(l).body, as_lam(r).body);
        return d;
      }
      PermPtr swap = px_swap(wl, wr);
      d.clash = !add_av_eq(d.eqs, as_lam(l).body, apply_perm(swap, as_lam(r).body, cx.g));
      d.fresh.push_back(Freshness{wl, r});  // W1 # lam W2.e2
      return d;
    }
    case ExprKind::Letrec: {
      if (as_letrec(l).env.size() != as_letrec(r).env.size()) {
        d.clash = true;
        return d;
      }
      d.letrec = true;
      return d;
    }
    default:
      d.clash = true;
      return d;
  }
}

struct AvLetrecBranch {
  std::vector<size_t> rho;
  std::vector<Equation> eqs;
  std::vector<Freshness> fresh;
};

void add_or_keep(std::vector<Equation>& out, Expr l, Expr r) {
  if (!add_av_eq(out, l, r)) out.push_back(orient_av(std::move(l), std::move(r)));
}

FunSym tuple_sym(size_t n) { return mk_fun("tuple" + std::to_string(n)); }

// Rule (7): iterated decomposition of the towers
//   lam W1...lam Wn.(rhs_1,...,rhs_n, body)
//     vs  lam W'rho(1)...lam W'rho(n).(rhs'_rho(1),...,rhs'_rho(n), body').
// Freshness constraints are exactly those of the n lambda levels.
std::vector<AvLetrecBranch> expand_letrec_av(const Expr& l, const Expr& r, AvCtx& cx) {
  auto ls = letrec_bindings(l);
  auto rs = letrec_bindings(r);
  const size_t n = ls.size();
  std::vector<AvLetrecBranch> branches;
  std::vector<size_t> rho(n);
  for (size_t i = 0; i < n; ++i) rho[i] = i;
  do {
    AvLetrecBranch br;
    br.rho = rho;
    PermPtr right_perm = nullptr;
    for (size_t k = 0; k < n; ++k) {
      const W& wl = ls[k].binder;
      W wr_cur = mk_w(px_compose(right_perm, rs[rho[k]].binder.perm, cx.g),
                      rs[rho[k]].binder.v, cx.g);
      if (w_equal(wl, wr_cur)) continue;  // rule (5) level
      // remaining right tower under the accumulated permutation
      std::vector<Expr> tuple_args;
      for (size_t i = 0; i < n; ++i) tuple_args.push_back(rs[rho[i]].rhs);
      tuple_args.push_back(as_letrec(r).body);
      Expr rest = mk_fun(tuple_sym(n + 1), std::move(tuple_args));
      for (size_t i = n; i-- > k + 1;) rest = mk_lam(rs[rho[i]].binder, rest);
      Expr target = mk_lam(wr_cur, apply_perm(right_perm, rest, cx.g));
      br.fresh.push_back(Freshness{wl, target});
      right_perm = px_compose(px_swap(wl, wr_cur), right_perm, cx.g);
    }
    for (size_t i = 0; i < n; ++i)
      add_or_keep(br.eqs, ls[i].rhs, apply_perm(right_perm, rs[rho[i]].rhs, cx.g));
    add_or_keep(br.eqs, as_letrec(l).body, apply_perm(right_perm, as_letrec(r).body, cx.g));
    branches.push_back(std::move(br));
  } while (std::next_permutation(rho.begin(), rho.end()));
  return branches;
}

// ---- failure machinery ----

std::map<ExprVar, Expr> theta_map(const std::vector<Assignment>& theta) {
  std::map<ExprVar, Expr> m;
  for (const Assignment& a : theta) m.emplace(a.var, a.value);
  return m;
}

AtomSet fa_min_theta(const std::map<ExprVar, Expr>& assign, ExprVar x);

// Conservative free atoms (stuck parts contribute nothing), so membership
// implies the atom is free in every ground instance.
AtomSet fa_min_expr(const std::map<ExprVar, Expr>& assign, const Expr& e) {
  switch (e.kind()) {
    case ExprKind::WLeaf: {
      const W& w = as_wleaf(e).w;
      if (w_is_atom(w)) return {w_as_atom(w)};
      return {};
    }
    case ExprKind::Susp: {
      const auto& s = as_susp(e);
      AtomSet inner = fa_min_theta(assign, s.var);
      if (inner.empty() || !px_is_ground(s.perm)) return {};
      Perm p = px_eval_ground(s.perm, nullptr);
      AtomSet out;
      for (Atom a : inner) out.insert(p.apply(a));
      return out;
    }
    case ExprKind::Lam: {
      AtomSet fa = fa_min_expr(assign, as_lam(e).body);
      if (!w_is_atom(as_lam(e).binder)) return {};
      fa.erase(w_as_atom(as_lam(e).binder));
      return fa;
    }
    case ExprKind::Fun: {
      AtomSet fa;
      for (const Expr& a : as_fun(e).args) {
        AtomSet sub = fa_min_expr(assign, a);
        fa.insert(sub.begin(), sub.end());
      }
      return fa;
    }
    case ExprKind::Letrec: {
      AtomSet fa = fa_min_expr(assign, as_letrec(e).body);
      AtomSet binders;
      for (const EnvItem& item : as_letrec(e).env) {
        const auto& b = std::get<Binding>(item);
        if (!w_is_atom(b.binder)) return {};
        binders.insert(w_as_atom(b.binder));
        AtomSet sub = fa_min_expr(assign, b.rhs);
        fa.insert(sub.begin(), sub.end());
      }
      for (Atom a : binders) fa.erase(a);
      return fa;
    }
  }
  return {};
}

AtomSet fa_min_theta(const std::map<ExprVar, Expr>& assign, ExprVar x) {
  auto it = assign.find(x);
  if (it == assign.end()) return {};
  return fa_min_expr(assign, it->second);
}

bool has_cycle_av(const std::vector<Equation>& eqs) {
  std::map<ExprVar, std::set<ExprVar>> edges;
  for (const Equation& eq : eqs) {
    if (!is_susp(eq.lhs) || is_susp(eq.rhs) || is_wleaf(eq.rhs)) continue;
    ExprVar x = as_susp(eq.lhs).var;
    std::set<ExprVar> vs;
    collect_expr_vars(eq.rhs, vs);
    for (ExprVar y : vs) edges[x].insert(y);
  }
  std::map<ExprVar, int> color;
  auto dfs = [&](auto&& self, ExprVar v) -> bool {
    int& c = color[v];
    if (c == 1) return true;
    if (c == 2) return false;
    c = 1;
    for (ExprVar w2 : edges[v])
      if (self(self, w2)) return true;
    c = 2;
    return false;
  };
  for (auto& [v, unused] : edges)
    if (dfs(dfs, v)) return true;
  return false;
}

struct FixFamily {
  ExprVar var;
  std::vector<size_t> eq_indices;
};

std::vector<FixFamily> fix_families(const std::vector<Equation>& eqs) {
  std::vector<FixFamily> fams;
  std::map<uint32_t, size_t> index;
  for (size_t i = 0; i < eqs.size(); ++i) {
    if (!is_fixpoint_eq(eqs[i])) continue;
    ExprVar x = as_susp(eqs[i].lhs).var;
    auto [it, inserted] = index.emplace(x.id, fams.size());
    if (inserted) fams.push_back(FixFamily{x, {}});
    fams[it->second].eq_indices.push_back(i);
  }
  return fams;
}

void subst_state(AvState& s, ExprVar x, const Expr& value, AvCtx& cx) {
  for (Equation& eq : s.eqs) {
    Expr l = subst_var(eq.lhs, x, value, cx.g);
    Expr r = subst_var(eq.rhs, x, value, cx.g);
    eq = orient_av(std::move(l), std::move(r));
  }
  subst_expr_var(s.nabla, x, value, cx.g);
  s.theta.push_back(Assignment{x, value});
}

// (ElimA): substitutes an atom everywhere, including into theta values.
void elim_atom_var(AvState& s, AtomVar a, Atom b, AvCtx& cx) {
  for (Equation& eq : s.eqs) {
    Expr l = subst_atom_var(eq.lhs, a, b, cx.g);
    Expr r = subst_atom_var(eq.rhs, a, b, cx.g);
    eq = orient_av(std::move(l), std::move(r));
  }
  subst_atom_var_ctx(s.nabla, a, b, cx.g);
  for (Assignment& as2 : s.theta) as2.value = subst_atom_var(as2.value, a, b, cx.g);
  s.atom_theta.push_back({a, b});
}

AtomSet state_atoms(const AvState& s, const AvCtx& cx) {
  AtomSet atoms;
  for (const Equation& eq : s.eqs) {
    collect_atoms(eq.lhs, cx.g, atoms);
    collect_atoms(eq.rhs, cx.g, atoms);
  }
  for (const AtomicFreshness& af : s.nabla.atomic) atoms.insert(af.atom);
  for (const Freshness& f : s.nabla.suspended) {
    w_collect_atoms(f.subject, cx.g, atoms);
    collect_atoms(f.target, cx.g, atoms);
  }
  for (const FreshEq& eq : s.nabla.equalities) {
    w_collect_atoms(eq.lhs, cx.g, atoms);
    w_collect_atoms(eq.rhs, cx.g, atoms);
  }
  for (const Assignment& a : s.theta) collect_atoms(a.value, cx.g, atoms);
  for (auto& [av, at] : s.atom_theta) atoms.insert(at);
  return atoms;
}

void elim_fp_exhaustive(AvState& s, AvCtx& cx) {
  bool changed = true;
  while (changed) {
    changed = false;
    auto fams = fix_families(s.eqs);
    for (const FixFamily& fam : fams) {
      std::vector<std::pair<size_t, Perm>> ground;
      for (size_t i : fam.eq_indices) {
        const Equation& eq = s.eqs[i];
        const PermPtr& pl = as_susp(eq.lhs).perm;
        const PermPtr& pr = as_susp(eq.rhs).perm;
        if (!px_is_ground(pl) || !px_is_ground(pr)) continue;
        ground.push_back({i, compose(px_eval_ground(pl, cx.g).inverse(),
                                     px_eval_ground(pr, cx.g))});
      }
      if (ground.size() < 2) continue;
      for (size_t k = 0; k < ground.size() && !changed; ++k) {
        std::vector<Perm> gens;
        for (size_t j = 0; j < ground.size(); ++j)
          if (j != k) gens.push_back(ground[j].second);
        if (group_member(ground[k].second, gens)) {
          s.eqs.erase(s.eqs.begin() + ground[k].first);
          ++cx.stats->rule_counts["(ElimFP)"];
          changed = true;
        }
      }
      if (changed) break;
    }
  }
}

struct AvStepResult {
  enum class Kind { Next, Branches, Fail, Done, Stuck } kind;
  std::string rule;
  AvState next;
  std::vector<AvState> branches;
  Unifier unifier;
};

AvState av_child(const AvState& s) {
  AvState c = s;
  c.rule_apps = s.rule_apps + 1;
  return c;
}

// Exact output check for one witness: instantiate the atom variables, map
// every remaining expression variable to one shared fresh atom, and verify
// the atomic constraints against the expanded substitution.
bool output_check(const AvState& s, AvCtx& cx, const AvWitness& w,
                  const FreshnessContext& simplified) {
  std::map<AtomVar, Atom> assign = w.assignment;
  AtomSet avoid = state_atoms(s, cx);
  for (auto& [av, at] : assign) avoid.insert(at);
  std::set<AtomVar> theta_avars;
  for (const Assignment& a : s.theta) collect_atom_vars(a.value, cx.g, theta_avars);
  for (AtomVar av : theta_avars) {
    if (assign.count(av)) continue;
    Atom fa = fresh_atom(avoid);
    avoid.insert(fa);
    assign.emplace(av, fa);
  }
  Atom shared = fresh_atom(avoid);

  std::vector<Assignment> theta = s.theta;
  for (Assignment& a : theta) {
    Expr v = a.value;
    for (auto& [av, at] : assign) v = subst_atom_var(v, av, at, cx.g);
    a.value = v;
  }
  auto ground_of = [&](ExprVar x) -> Expr {
    Expr e = expand_theta(theta, mk_var(x));
    std::set<ExprVar> rest;
    collect_expr_vars(e, rest);
    for (ExprVar v : rest) e = subst_var(e, v, mk_atom_leaf(shared), cx.g);
    return e;
  };
  for (const AtomicFreshness& af : simplified.atomic) {
    Expr e = ground_of(af.var);
    if (!is_ground(e)) return false;
    if (free_atoms(e).count(af.atom)) return false;
  }
  return true;
}

AvStepResult av_step(const AvState& s, AvCtx& cx) {
  AvStepResult res;
  auto fail = [&](const std::string& why) {
    res.kind = AvStepResult::Kind::Fail;
    res.rule = why;
    return res;
  };

  // ---- failure rules ----
  if (s.nabla.bot) return fail("FailF");
  {
    auto assign = theta_map(s.theta);
    for (const AtomicFreshness& af : s.nabla.atomic)
      if (fa_min_theta(assign, af.var).count(af.atom)) return fail("FailFS");
  }
  for (const Equation& eq : s.eqs) {
    const Expr& l = eq.lhs;
    const Expr& r = eq.rhs;
    if (is_wleaf(l) && is_wleaf(r)) {
      const W& wl = as_wleaf(l).w;
      const W& wr = as_wleaf(r).w;
      if (w_is_atom(wl) && w_is_atom(wr) && !(w_as_atom(wl) == w_as_atom(wr)))
        return fail("Clashab");
      continue;
    }
    if (is_wleaf(l) && !is_susp(r)) return fail("ClashA");
    if (is_susp(l) || is_susp(r) || is_wleaf(r)) continue;
    if (l.kind() != r.kind()) return fail("Clash");
    if (l.kind() == ExprKind::Fun &&
        (!(as_fun(l).sym == as_fun(r).sym) || as_fun(l).args.size() != as_fun(r).args.size()))
      return fail("Clash");
    if (l.kind() == ExprKind::Letrec &&
        as_letrec(l).env.size() != as_letrec(r).env.size())
      return fail("Clash");
  }
  if (has_cycle_av(s.eqs)) return fail("Cycle");

  // ---- (1) ----
  for (size_t i = 0; i < s.eqs.size(); ++i) {
    if (!equal(s.eqs[i].lhs, s.eqs[i].rhs)) continue;
    AvState c = av_child(s);
    c.eqs.erase(c.eqs.begin() + i);
    res.kind = AvStepResult::Kind::Next;
    res.rule = "(1)";
    res.next = std::move(c);
    return res;
  }

  // ---- (2): a pair of atom/atom-variable suspensions becomes =# ----
  for (size_t i = 0; i < s.eqs.size(); ++i) {
    const Equation& eq = s.eqs[i];
    if (!is_wleaf(eq.lhs) || !is_wleaf(eq.rhs)) continue;
    const W& wl = as_wleaf(eq.lhs).w;
    const W& wr = as_wleaf(eq.rhs).w;
    AvState c = av_child(s);
    c.eqs.erase(c.eqs.begin() + i);
    W rhs = mk_w(px_compose(px_inverse(wl.perm, cx.g), wr.perm, cx.g), wr.v, cx.g);
    add_equality(c.nabla, FreshEq{W{nullptr, wl.v}, rhs}, cx.g);
    res.kind = AvStepResult::Kind::Next;
    res.rule = "(2)";
    res.next = std::move(c);
    return res;
  }

  // ---- (3a)/(3b) ----
  for (size_t i = 0; i < s.eqs.size(); ++i) {
    const Equation& eq = s.eqs[i];
    if (!is_susp(eq.lhs)) continue;
    const auto& sl = as_susp(eq.lhs);
    if (is_susp(eq.rhs)) {
      const auto& sr = as_susp(eq.rhs);
      if (sl.var == sr.var) continue;  // fixpoint equation
      Expr value = mk_susp(px_compose(px_inverse(sl.perm, cx.g), sr.perm, cx.g), sr.var);
      AvState c = av_child(s);
      c.eqs.erase(c.eqs.begin() + i);
      subst_state(c, sl.var, value, cx);
      res.kind = AvStepResult::Kind::Next;
      res.rule = "(3a)";
      res.next = std::move(c);
      return res;
    }
    if (is_wleaf(eq.rhs)) {
      const W& wr = as_wleaf(eq.rhs).w;
      W image = mk_w(px_compose(px_inverse(sl.perm, cx.g), wr.perm, cx.g), wr.v, cx.g);
      AvState c = av_child(s);
      c.eqs.erase(c.eqs.begin() + i);
      subst_state(c, sl.var, mk_wleaf(image), cx);
      res.kind = AvStepResult::Kind::Next;
      res.rule = "(3b)";
      res.next = std::move(c);
      return res;
    }
  }

  // ---- (4),(5),(6) ----
  for (size_t i = 0; i < s.eqs.size(); ++i) {
    const Equation& eq = s.eqs[i];
    if (is_susp(eq.lhs) || is_susp(eq.rhs) || is_wleaf(eq.lhs) || is_wleaf(eq.rhs)) continue;
    if (eq.lhs.kind() == ExprKind::Letrec) continue;  // rule (7) has lowest priority
    AvDecomposed d = decompose_av(eq.lhs, eq.rhs, cx);
    if (d.clash) return fail("Clash");
    AvState c = av_child(s);
    c.eqs.erase(c.eqs.begin() + i);
    for (Equation& e2 : d.eqs) c.eqs.push_back(std::move(e2));
    for (Freshness& f : d.fresh) add_constraint(c.nabla, std::move(f), cx.g);
    res.kind = AvStepResult::Kind::Next;
    res.rule = eq.lhs.kind() == ExprKind::Fun                       ? "(4)"
               : w_equal(as_lam(eq.lhs).binder, as_lam(eq.rhs).binder) ? "(5)"
                                                                       : "(6)";
    res.next = std::move(c);
    return res;
  }

  // ---- (ElimFP), ground permutations only ----
  {
    auto fams = fix_families(s.eqs);
    for (const FixFamily& fam : fams) {
      std::vector<std::pair<size_t, Perm>> ground;
      for (size_t i : fam.eq_indices) {
        const Equation& eq = s.eqs[i];
        if (!px_is_ground(as_susp(eq.lhs).perm) || !px_is_ground(as_susp(eq.rhs).perm))
          continue;
        ground.push_back({i, compose(px_eval_ground(as_susp(eq.lhs).perm, cx.g).inverse(),
                                     px_eval_ground(as_susp(eq.rhs).perm, cx.g))});
      }
      if (ground.size() < 2) continue;
      for (size_t k = 0; k < ground.size(); ++k) {
        std::vector<Perm> gens;
        for (size_t j = 0; j < ground.size(); ++j)
          if (j != k) gens.push_back(ground[j].second);
        if (group_member(ground[k].second, gens)) {
          AvState c = av_child(s);
          c.eqs.erase(c.eqs.begin() + ground[k].first);
          res.kind = AvStepResult::Kind::Next;
          res.rule = "(ElimFP)";
          res.next = std::move(c);
          return res;
        }
      }
    }
  }

  // ---- (MMS) ----
  {
    std::map<uint32_t, size_t> first_def;
    for (size_t i = 0; i < s.eqs.size(); ++i) {
      const Equation& eq = s.eqs[i];
      if (!is_susp(eq.lhs) || is_susp(eq.rhs) || is_wleaf(eq.rhs)) continue;
      ExprVar x = as_susp(eq.lhs).var;
      auto [it, inserted] = first_def.emplace(x.id, i);
      if (inserted) continue;
      size_t i1 = it->second, i2 = i;
      Expr l = apply_perm(px_inverse(as_susp(s.eqs[i1].lhs).perm, cx.g), s.eqs[i1].rhs, cx.g);
      Expr r = apply_perm(px_inverse(as_susp(s.eqs[i2].lhs).perm, cx.g), s.eqs[i2].rhs, cx.g);
      AvDecomposed d = decompose_av(l, r, cx);
      if (d.clash) return fail("Clash");
      if (d.letrec) {
        auto brs = expand_letrec_av(l, r, cx);
        res.kind = AvStepResult::Kind::Branches;
        res.rule = "(MMS)";
        for (AvLetrecBranch& br : brs) {
          AvState c = av_child(s);
          c.eqs.erase(c.eqs.begin() + i2);
          for (Equation& e2 : br.eqs) c.eqs.push_back(std::move(e2));
          for (Freshness& f : br.fresh) add_constraint(c.nabla, std::move(f), cx.g);
          res.branches.push_back(std::move(c));
        }
        return res;
      }
      AvState c = av_child(s);
      c.eqs.erase(c.eqs.begin() + i2);
      for (Equation& e2 : d.eqs) c.eqs.push_back(std::move(e2));
      for (Freshness& f : d.fresh) add_constraint(c.nabla, std::move(f), cx.g);
      res.kind = AvStepResult::Kind::Next;
      res.rule = "(MMS)";
      res.next = std::move(c);
      return res;
    }
  }

  // ---- (Output), ahead of ElimAB/FPS/(7) per the strategy priorities ----
  {
    bool all_fix = true;
    for (const Equation& eq : s.eqs)
      if (!is_fixpoint_eq(eq)) all_fix = false;
    if (all_fix) {
      auto witnesses = av_witnesses(s.nabla, cx.g);
      bool found = false;
      for (const AvWitness& w : witnesses) {
        FreshnessContext c2 = s.nabla;
        for (auto& [av, at] : w.assignment) subst_atom_var_ctx(c2, av, at, cx.g);
        if (c2.bot) continue;
        if (output_check(s, cx, w, c2)) {
          found = true;
          break;
        }
      }
      if (!found) return fail("NablaUnsat");
      res.kind = AvStepResult::Kind::Done;
      res.rule = "(Output)";
      res.unifier = Unifier{s.theta, s.atom_theta, s.nabla, s.eqs};
      return res;
    }
  }

  // ---- ElimAB(p): instantiate the atom variables of an oversized family ----
  {
    auto fams = fix_families(s.eqs);
    for (const FixFamily& fam : fams) {
      if (static_cast<double>(fam.eq_indices.size()) <= cx.p_s) continue;
      std::set<AtomVar> avars;
      for (size_t i : fam.eq_indices) {
        px_collect_atom_vars(as_susp(s.eqs[i].lhs).perm, cx.g, avars);
        px_collect_atom_vars(as_susp(s.eqs[i].rhs).perm, cx.g, avars);
      }
      if (avars.empty()) continue;  // already ground; nothing to guess
      res.kind = AvStepResult::Kind::Branches;
      res.rule = "(ElimAB)";
      std::vector<AvState> frontier{av_child(s)};
      for (AtomVar av : avars) {
        std::vector<AvState> next;
        for (AvState& st : frontier) {
          AtomSet pool = state_atoms(st, cx);
          Atom fresh = fresh_atom(pool);
          std::vector<Atom> choices(pool.begin(), pool.end());
          choices.push_back(fresh);
          for (Atom b : choices) {
            AvState c2 = st;
            elim_atom_var(c2, av, b, cx);
            next.push_back(std::move(c2));
          }
        }
        frontier = std::move(next);
      }
      for (AvState& st : frontier) {
        elim_fp_exhaustive(st, cx);
        for (const FixFamily& f2 : fix_families(st.eqs))
          if (static_cast<double>(f2.eq_indices.size()) > cx.elimab_bound)
            ++cx.stats->elimab_bound_violations;
        res.branches.push_back(std::move(st));
      }
      return res;
    }
  }

  // ---- (FPS) ----
  for (size_t i = 0; i < s.eqs.size(); ++i) {
    const Equation& eq = s.eqs[i];
    if (!is_susp(eq.lhs) || is_susp(eq.rhs) || is_wleaf(eq.rhs)) continue;
    ExprVar x = as_susp(eq.lhs).var;
    const Expr& e = eq.rhs;
    if (occurs(e, x)) continue;
    std::vector<size_t> fixpoints;
    bool blocked = false;
    for (size_t j = 0; j < s.eqs.size() && !blocked; ++j) {
      if (j == i) continue;
      if (is_fixpoint_eq(s.eqs[j]) && as_susp(s.eqs[j].lhs).var == x) {
        fixpoints.push_back(j);
        continue;
      }
      if (occurs(s.eqs[j].lhs, x) || occurs(s.eqs[j].rhs, x)) blocked = true;
    }
    if (blocked) continue;
    Expr value = apply_perm(px_inverse(as_susp(eq.lhs).perm, cx.g), e, cx.g);
    AvState c = av_child(s);
    std::vector<Equation> kept, generated;
    for (size_t j = 0; j < c.eqs.size(); ++j) {
      if (j == i) continue;
      if (std::find(fixpoints.begin(), fixpoints.end(), j) != fixpoints.end()) {
        const Equation& fp = c.eqs[j];
        if (!add_av_eq(generated, apply_perm(as_susp(fp.lhs).perm, value, cx.g),
                       apply_perm(as_susp(fp.rhs).perm, value, cx.g)))
          return fail("Clash");
        continue;
      }
      kept.push_back(c.eqs[j]);
    }
    for (Equation& g2 : generated) kept.push_back(std::move(g2));
    c.eqs = std::move(kept);
    c.theta.push_back(Assignment{x, value});
    res.kind = AvStepResult::Kind::Next;
    res.rule = "(FPS)";
    res.next = std::move(c);
    return res;
  }

  // ---- rule (7), lowest priority ----
  for (size_t i = 0; i < s.eqs.size(); ++i) {
    const Equation& eq = s.eqs[i];
    if (eq.lhs.kind() != ExprKind::Letrec || eq.rhs.kind() != ExprKind::Letrec) continue;
    auto brs = expand_letrec_av(eq.lhs, eq.rhs, cx);
    res.kind = AvStepResult::Kind::Branches;
    res.rule = "(7)";
    for (AvLetrecBranch& br : brs) {
      AvState c = av_child(s);
      c.eqs.erase(c.eqs.begin() + i);
      for (Equation& e2 : br.eqs) c.eqs.push_back(std::move(e2));
      for (Freshness& f : br.fresh) add_constraint(c.nabla, std::move(f), cx.g);
      res.branches.push_back(std::move(c));
    }
    return res;
  }

  res.kind = AvStepResult::Kind::Stuck;
  res.rule = "stuck";
  return res;
}

uint64_t scan_fresh_start_av(const UnifyProblemFile& problem) {
  std::set<ExprVar> vars;
  for (auto& [l, r] : problem.equations) {
    collect_expr_vars(l, vars);
    collect_expr_vars(r, vars);
  }
  for (auto& f : problem.freshness) collect_expr_vars(f.target, vars);
  uint64_t start = 1;
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
  return start;
}

}  // namespace

AvResult letrec_unify_av(const UnifyProblemFile& problem, const AvOptions& opts) {
  AvResult result;
  result.status = UnifyStatus::Unsat;
  result.grammar = std::make_shared<PermGrammar>();
  AvCtx cx{result.grammar.get(), 0, 0, 0, &result.stats};

  FreshVars fresh(scan_fresh_start_av(problem));

  AvState root;
  {
    std::vector<Equation> defs;
    std::vector<Freshness> constraints;
    for (auto& [l, r] : problem.equations) {
      Expr ln = normalize_perms(l, *result.grammar);
      Expr rn = normalize_perms(r, *result.grammar);
      inject_distinctness(ln, constraints);
      inject_distinctness(rn, constraints);
      Expr lf = av_flatten_node(ln, defs, fresh);
      Expr rf = av_flatten_node(rn, defs, fresh);
      root.eqs.push_back(orient_av(lf, rf));
    }
    for (Equation& d : defs) root.eqs.push_back(orient_av(d.lhs, d.rhs));
    for (const FreshnessIn& f : problem.freshness) {
      Expr t = normalize_perms(f.target, *result.grammar);
      inject_distinctness(t, constraints);
      constraints.push_back(Freshness{f.subject, t});
    }
    root.nabla = simplify(std::move(constraints), result.grammar.get());
  }

  for (const Equation& eq : root.eqs)
    result.stats.input_size_counted += size_counted(eq.lhs) + size_counted(eq.rhs);
  cx.input_size = result.stats.input_size_counted;
  cx.p_s = opts.p(cx.input_size);
  {
    double x = static_cast<double>(std::max<size_t>(cx.input_size, 2));
    cx.elimab_bound = std::max(cx.p_s, x * std::log2(x));
  }
  result.stats.p_of_s = cx.p_s;

  std::vector<AvState> stack{std::move(root)};
  std::set<std::string> seen;
  bool overflow = false;
  size_t entered = 1;

  auto note = [&](const AvState& st) {
    result.stats.max_rule_apps_per_branch =
        std::max(result.stats.max_rule_apps_per_branch, st.rule_apps);
    for (const auto& fam : fix_families(st.eqs))
      result.stats.max_fixpoint_eqs_per_var =
          std::max(result.stats.max_fixpoint_eqs_per_var, fam.eq_indices.size());
  };
  note(stack[0]);

  while (!stack.empty() && !overflow) {
    AvState s = std::move(stack.back());
    stack.pop_back();
    ++result.stats.states_explored;
    AvStepResult r = av_step(s, cx);
    ++result.stats.rule_counts[r.rule];
    MeasureSnapshot parent = measure_of_eqs(s.eqs);
    auto admit = [&](AvState&& st) {
      if (entered >= opts.budget) {
        overflow = true;
        return;
      }
      ++entered;
      if (!measure_of_eqs(st.eqs).lex_less_4(parent)) ++result.stats.measure_violations;
      note(st);
      stack.push_back(std::move(st));
    };
    switch (r.kind) {
      case AvStepResult::Kind::Done: {
        std::string key = print_unifier(r.unifier, result.grammar.get());
        if (seen.insert(key).second) result.unifiers.push_back(r.unifier);
        if (!opts.collecting) {
          result.status = UnifyStatus::Sat;
          result.stats.grammar_size = result.grammar->size();
          return result;
        }
        break;
      }
      case AvStepResult::Kind::Fail:
        break;
      case AvStepResult::Kind::Stuck:
        ++result.stats.stuck_states;
        break;
      case AvStepResult::Kind::Next:
        admit(std::move(r.next));
        break;
      case AvStepResult::Kind::Branches:
        ++result.stats.branch_points;
        for (auto it = r.branches.rbegin(); it != r.branches.rend(); ++it)
          admit(std::move(*it));
        break;
    }
  }

  if (overflow)
    result.status = UnifyStatus::Overflow;
  else if (!result.unifiers.empty())
    result.status = UnifyStatus::Sat;
  result.stats.grammar_size = result.grammar->size();
  return result;
}

}  // namespace nomlet
