#include "nomlet/unify.hpp"

#include <algorithm>
#include <cassert>
#include <deque>

#include "nomlet/permgroup.hpp"

namespace nomlet {

namespace {

bool is_susp(const Expr& e) { return e.kind() == ExprKind::Susp; }

// suspension-of-variable preferred on the left; fixed order among two
// suspensions so states are reproducible
Equation orient(Expr l, Expr r) {
  bool ls = is_susp(l), rs = is_susp(r);
  if (!ls && rs) {
    std::swap(l, r);
  } else if (ls && rs) {
    const auto& a = as_susp(l);
    const auto& b = as_susp(r);
    if (a.var == b.var) {
      if (px_cmp(a.perm, b.perm) > 0) std::swap(l, r);
    } else if (shortlex_less(b.var.name(), a.var.name())) {
      std::swap(l, r);
    }
  }
  return Equation{std::move(l), std::move(r)};
}

// Adds an equation, resolving trivial pairs eagerly; returns false on an
// immediate clash (keeps the termination measure strictly decreasing).
bool add_filtered(std::vector<Equation>& out, Expr l, Expr r) {
  if (equal(l, r)) return true;
  if (has_tops(l) && has_tops(r) && !(tops(l) == tops(r))) return false;
  out.push_back(orient(std::move(l), std::move(r)));
  return true;
}

// Constructor occurrences only. Leaves (atoms and suspensions alike) count
// zero: flattening keeps atom leaves in argument positions, and (MMS)
// duplicates an equation's arguments, so counting leaves would let a merge
// step tie instead of strictly decreasing the measure.
size_t count_symbols(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
    case ExprKind::Susp:
      return 0;
    case ExprKind::Lam:
      return 1 + count_symbols(as_lam(e).body);
    case ExprKind::Fun: {
      size_t s = 1;
      for (const Expr& a : as_fun(e).args) s += count_symbols(a);
      return s;
    }
    case ExprKind::Letrec: {
      size_t s = 1;
      for (const EnvItem& item : as_letrec(e).env)
        if (auto* b = std::get_if<Binding>(&item)) s += count_symbols(b->rhs);
      return s + count_symbols(as_letrec(e).body);
    }
  }
  return 0;
}

std::vector<Binding> letrec_bindings(const Expr& e) {
  std::vector<Binding> out;
  for (const EnvItem& item : as_letrec(e).env) out.push_back(std::get<Binding>(item));
  return out;
}

// cheap compatibility for pairing letrec bindings: a suspension matches
// anything, otherwise top classes must agree (atoms are identified since the
// pairing permutation renames them)
bool quick_compat(const Expr& a, const Expr& b) {
  if (is_susp(a) || is_susp(b)) return true;
  Tops ta = tops(a), tb = tops(b);
  if (ta.tag != tb.tag) return false;
  if (ta.tag == Tops::Tag::Fun) return ta.fun_id == tb.fun_id;
  if (ta.tag == Tops::Tag::Letrec) return ta.letrec_n == tb.letrec_n;
  return true;  // atoms: renamable
}

struct LetrecBranch {
  std::vector<Equation> eqs;
  std::vector<Freshness> fresh;
  std::vector<size_t> rho;
  Perm pi;
  bool clash = false;
};

// Rule (6): one branch per binding permutation rho (lexicographic order,
// pruned by quick_compat); pi extends {b_rho(i) -> a_i} canonically.
std::vector<LetrecBranch> expand_letrec(const Expr& l, const Expr& r) {
  auto ls = letrec_bindings(l);
  auto rs = letrec_bindings(r);
  assert(ls.size() == rs.size());
  const size_t n = ls.size();
  AtomSet lefts, rights;
  for (const Binding& b : ls) lefts.insert(w_as_atom(b.binder));
  for (const Binding& b : rs) rights.insert(w_as_atom(b.binder));

  std::vector<LetrecBranch> branches;
  std::vector<size_t> rho(n);
  for (size_t i = 0; i < n; ++i) rho[i] = i;
  do {
    bool compat = true;
    for (size_t i = 0; i < n && compat; ++i)
      compat = quick_compat(ls[i].rhs, rs[rho[i]].rhs);
    if (!compat) continue;

    LetrecBranch br;
    br.rho = rho;
    std::vector<std::pair<Atom, Atom>> forced;
    for (size_t i = 0; i < n; ++i)
      forced.push_back({w_as_atom(rs[rho[i]].binder), w_as_atom(ls[i].binder)});
    br.pi = extend_binder_bijection(forced, lefts, rights);
    PermPtr pi = px_ground(br.pi);
    bool ok = true;
    for (size_t i = 0; i < n && ok; ++i)
      ok = add_filtered(br.eqs, ls[i].rhs, apply_perm(pi, rs[rho[i]].rhs));
    if (ok) ok = add_filtered(br.eqs, as_letrec(l).body, apply_perm(pi, as_letrec(r).body));
    br.clash = !ok;
    for (const Binding& b : ls) br.fresh.push_back(Freshness{b.binder, r});
    branches.push_back(std::move(br));
  } while (std::next_permutation(rho.begin(), rho.end()));
  return branches;
}

struct Decomposed {
  bool clash = false;
  bool letrec = false;  // caller expands branches
  std::vector<Equation> eqs;
  std::vector<Freshness> fresh;
};

// Rules (3)-(5) on a pair with equal tops; letrec pairs are flagged for
// branch expansion.
Decomposed decompose_pair(const Expr& l, const Expr& r) {
  Decomposed d;
  if (equal(l, r)) return d;
  if (!has_tops(l) || !has_tops(r) || !(tops(l) == tops(r))) {
    d.clash = true;
    return d;
  }
  switch (l.kind()) {
    case ExprKind::WLeaf:
      d.clash = true;  // equal tops for atoms means equal atoms, handled above
      return d;
    case ExprKind::Fun: {
      const auto& fl = as_fun(l);
      const auto& fr = as_fun(r);
      for (size_t i = 0; i < fl.args.size(); ++i)
        if (!add_filtered(d.eqs, fl.args[i], fr.args[i])) {
          d.clash = true;
          return d;
        }
      return d;
    }
    case ExprKind::Lam: {
      Atom a = w_as_atom(as_lam(l).binder);
      Atom b = w_as_atom(as_lam(r).binder);
      if (a == b) {
        if (!add_filtered(d.eqs, as_lam(l).body, as_lam(r).body)) d.clash = true;
        return d;
      }
      if (!add_filtered(d.eqs, as_lam(l).body,
                        apply_perm(Perm::swap(a, b), as_lam(r).body)))
        d.clash = true;
      d.fresh.push_back(Freshness{w_atom(a), as_lam(r).body});
      return d;
    }
    case ExprKind::Letrec:
      d.letrec = true;
      return d;
    default:
      d.clash = true;
      return d;
  }
}

std::set<ExprVar> vars_of(const Expr& e) {
  std::set<ExprVar> out;
  collect_expr_vars(e, out);
  return out;
}

bool has_cycle(const std::vector<Equation>& eqs) {
  std::map<ExprVar, std::set<ExprVar>> edges;
  for (const Equation& eq : eqs) {
    if (!is_susp(eq.lhs) || is_susp(eq.rhs)) continue;
    ExprVar x = as_susp(eq.lhs).var;
    for (ExprVar y : vars_of(eq.rhs)) edges[x].insert(y);
  }
  std::map<ExprVar, int> color;  // 0 new, 1 open, 2 done
  auto dfs = [&](auto&& self, ExprVar v) -> bool {
    int& c = color[v];
    if (c == 1) return true;
    if (c == 2) return false;
    c = 1;
    for (ExprVar w : edges[v])
      if (self(self, w)) return true;
    c = 2;
    return false;
  };
  for (auto& [v, unused] : edges)
    if (dfs(dfs, v)) return true;
  return false;
}

std::map<ExprVar, Expr> theta_map(const std::vector<Assignment>& theta) {
  std::map<ExprVar, Expr> m;
  for (const Assignment& a : theta) m.emplace(a.var, a.value);
  return m;
}

// Free atoms of X after applying the substitution chain; suspensions of
// unassigned variables contribute nothing, so membership here means the atom
// is free in every ground instance.
struct ThetaFA {
  const std::map<ExprVar, Expr>& assign;
  std::map<ExprVar, AtomSet> memo;
  std::set<ExprVar> in_progress;

  AtomSet of_var(ExprVar x) {
    auto it = memo.find(x);
    if (it != memo.end()) return it->second;
    auto at = assign.find(x);
    if (at == assign.end() || in_progress.count(x)) return {};
    in_progress.insert(x);
    AtomSet fa = of_expr(at->second);
    in_progress.erase(x);
    memo[x] = fa;
    return fa;
  }

  AtomSet of_expr(const Expr& e) {
    switch (e.kind()) {
      case ExprKind::WLeaf: {
        const W& w = as_wleaf(e).w;
        if (w_is_atom(w)) return {w_as_atom(w)};
        return {};
      }
      case ExprKind::Susp: {
        const auto& s = as_susp(e);
        AtomSet inner = of_var(s.var);
        if (inner.empty()) return {};
        if (!px_is_ground(s.perm)) return {};
        Perm p = px_eval_ground(s.perm, nullptr);
        AtomSet out;
        for (Atom a : inner) out.insert(p.apply(a));
        return out;
      }
      case ExprKind::Lam: {
        const auto& l = as_lam(e);
        AtomSet fa = of_expr(l.body);
        if (!w_is_atom(l.binder)) return {};
        fa.erase(w_as_atom(l.binder));
        return fa;
      }
      case ExprKind::Fun: {
        AtomSet fa;
        for (const Expr& a : as_fun(e).args) {
          AtomSet sub = of_expr(a);
          fa.insert(sub.begin(), sub.end());
        }
        return fa;
      }
      case ExprKind::Letrec: {
        const auto& l = as_letrec(e);
        AtomSet fa = of_expr(l.body);
        AtomSet binders;
        for (const EnvItem& item : l.env) {
          auto* b = std::get_if<Binding>(&item);
          if (!b || !w_is_atom(b->binder)) return {};
          binders.insert(w_as_atom(b->binder));
          AtomSet sub = of_expr(b->rhs);
          fa.insert(sub.begin(), sub.end());
        }
        for (Atom a : binders) fa.erase(a);
        return fa;
      }
    }
    return {};
  }
};

struct FixpointFamily {
  ExprVar var;
  std::vector<size_t> eq_indices;
};

std::vector<FixpointFamily> fixpoint_families(const std::vector<Equation>& eqs) {
  std::vector<FixpointFamily> fams;
  std::map<uint32_t, size_t> index;
  for (size_t i = 0; i < eqs.size(); ++i) {
    if (!is_fixpoint_eq(eqs[i])) continue;
    ExprVar x = as_susp(eqs[i].lhs).var;
    auto [it, inserted] = index.emplace(x.id, fams.size());
    if (inserted) fams.push_back(FixpointFamily{x, {}});
    fams[it->second].eq_indices.push_back(i);
  }
  return fams;
}

UnifState child_of(const UnifState& s) {
  UnifState c = s;
  c.rule_apps = s.rule_apps + 1;
  return c;
}

void drop_eq(std::vector<Equation>& eqs, size_t i) { eqs.erase(eqs.begin() + i); }

}  // namespace

bool MeasureSnapshot::lex_less_3(const MeasureSnapshot& o) const {
  if (num_var != o.num_var) return num_var < o.num_var;
  if (num_lr_lam_fa != o.num_lr_lam_fa) return num_lr_lam_fa < o.num_lr_lam_fa;
  return num_eqs < o.num_eqs;
}

bool MeasureSnapshot::lex_less_4(const MeasureSnapshot& o) const {
  if (num_var != o.num_var) return num_var < o.num_var;
  if (num_lr_lam_fa != o.num_lr_lam_fa) return num_lr_lam_fa < o.num_lr_lam_fa;
  if (num_eqs != o.num_eqs) return num_eqs < o.num_eqs;
  return num_eqs_nonvar < o.num_eqs_nonvar;
}

MeasureSnapshot measure_of_eqs(const std::vector<Equation>& eqs) {
  MeasureSnapshot m;
  std::set<ExprVar> vars;
  for (const Equation& eq : eqs) {
    collect_expr_vars(eq.lhs, vars);
    collect_expr_vars(eq.rhs, vars);
    m.num_lr_lam_fa += count_symbols(eq.lhs) + count_symbols(eq.rhs);
    if (eq.lhs.kind() != ExprKind::Susp && eq.rhs.kind() != ExprKind::Susp)
      ++m.num_eqs_nonvar;
  }
  m.num_var = vars.size();
  m.num_eqs = eqs.size();
  return m;
}

bool is_var_susp(const Expr& e) { return e.kind() == ExprKind::Susp; }

bool is_fixpoint_eq(const Equation& eq) {
  return is_susp(eq.lhs) && is_susp(eq.rhs) &&
         as_susp(eq.lhs).var == as_susp(eq.rhs).var;
}

std::vector<Equation> flatten(std::vector<Equation> eqs, FreshVars& fresh) {
  std::vector<Equation> out;

  auto flat_node = [&](auto&& self, const Expr& e, std::vector<Equation>& defs) -> Expr {
    auto child = [&](const Expr& c) -> Expr {
      if (c.kind() == ExprKind::WLeaf || c.kind() == ExprKind::Susp) return c;
      Expr inner = self(self, c, defs);
      ExprVar x = fresh.make();
      defs.push_back(Equation{mk_var(x), inner});
      return mk_var(x);
    };
    switch (e.kind()) {
      case ExprKind::WLeaf:
      case ExprKind::Susp:
        return e;
      case ExprKind::Lam:
        return mk_lam(as_lam(e).binder, child(as_lam(e).body));
      case ExprKind::Fun: {
        std::vector<Expr> args;
        for (const Expr& a : as_fun(e).args) args.push_back(child(a));
        return mk_fun(as_fun(e).sym, std::move(args));
      }
      case ExprKind::Letrec: {
        std::vector<EnvItem> env;
        for (const EnvItem& item : as_letrec(e).env) {
          if (auto* b = std::get_if<Binding>(&item))
            env.push_back(Binding{b->binder, child(b->rhs)});
          else
            env.push_back(item);
        }
        return mk_letrec(std::move(env), child(as_letrec(e).body));
      }
    }
    return e;
  };

  for (Equation& eq : eqs) {
    std::vector<Equation> defs;
    Expr l = flat_node(flat_node, eq.lhs, defs);
    Expr r = flat_node(flat_node, eq.rhs, defs);
    out.push_back(orient(std::move(l), std::move(r)));
    for (Equation& d : defs) out.push_back(orient(d.lhs, d.rhs));
  }
  return out;
}

StepResult step(const UnifState& s, const UnifyOptions& opts) {
  StepResult res;
  auto fail = [&](const std::string& why) {
    res.kind = StepResult::Kind::Fail;
    res.rule = why;
    res.fail_reason = why;
    return res;
  };

  // ---- failure rules, checked eagerly ----
  if (s.nabla.bot) return fail("FailF");
  {
    auto assign = theta_map(s.theta);
    ThetaFA fa{assign};
    for (const AtomicFreshness& af : s.nabla.atomic) {
      if (!assign.count(af.var)) continue;
      if (fa.of_var(af.var).count(af.atom)) return fail("FailFS");
    }
  }
  for (const Equation& eq : s.eqs) {
    if (is_susp(eq.lhs) || is_susp(eq.rhs)) continue;
    if (!(tops(eq.lhs) == tops(eq.rhs))) return fail("Clash");
  }
  if (has_cycle(s.eqs)) return fail("Cycle");

  // ---- rule (1): remove trivial equations ----
  for (size_t i = 0; i < s.eqs.size(); ++i) {
    if (!equal(s.eqs[i].lhs, s.eqs[i].rhs)) continue;
    UnifState c = child_of(s);
    drop_eq(c.eqs, i);
    res.kind = StepResult::Kind::Next;
    res.rule = "(1)";
    res.next = std::move(c);
    return res;
  }

  // ---- rule (2): variable-variable elimination ----
  for (size_t i = 0; i < s.eqs.size(); ++i) {
    const Equation& eq = s.eqs[i];
    if (!is_susp(eq.lhs) || !is_susp(eq.rhs)) continue;
    const auto& a = as_susp(eq.lhs);
    const auto& b = as_susp(eq.rhs);
    if (a.var == b.var) continue;
    Expr value = mk_susp(px_compose(px_inverse(a.perm, nullptr), b.perm, nullptr), b.var);
    UnifState c = child_of(s);
    drop_eq(c.eqs, i);
    for (Equation& e2 : c.eqs) {
      Expr l = subst_var(e2.lhs, a.var, value);
      Expr r = subst_var(e2.rhs, a.var, value);
      e2 = orient(std::move(l), std::move(r));
    }
    subst_expr_var(c.nabla, a.var, value);
    c.theta.push_back(Assignment{a.var, value});
    res.kind = StepResult::Kind::Next;
    res.rule = "(2)";
    res.next = std::move(c);
    return res;
  }

  // ---- rules (3)-(6): decomposition ----
  for (size_t i = 0; i < s.eqs.size(); ++i) {
    const Equation& eq = s.eqs[i];
    if (is_susp(eq.lhs) || is_susp(eq.rhs)) continue;
    Decomposed d = decompose_pair(eq.lhs, eq.rhs);
    if (d.clash) return fail("Clash");
    if (d.letrec) {
      auto branches = expand_letrec(eq.lhs, eq.rhs);
      res.kind = StepResult::Kind::Branches;
      res.rule = "(6)";
      for (LetrecBranch& br : branches) {
        StepBranch sb;
        sb.rho = std::move(br.rho);
        sb.pi = std::move(br.pi);
        UnifState c = child_of(s);
        drop_eq(c.eqs, i);
        if (br.clash) {
          // dead branch: record as an immediately failing state
          c.nabla.bot = true;
        } else {
          for (Equation& e2 : br.eqs) c.eqs.push_back(std::move(e2));
          for (Freshness& f : br.fresh) add_constraint(c.nabla, std::move(f));
        }
        sb.state = std::move(c);
        res.branches.push_back(std::move(sb));
      }
      return res;
    }
    UnifState c = child_of(s);
    drop_eq(c.eqs, i);
    for (Equation& e2 : d.eqs) c.eqs.push_back(std::move(e2));
    for (Freshness& f : d.fresh) add_constraint(c.nabla, std::move(f));
    res.kind = StepResult::Kind::Next;
    res.rule = eq.lhs.kind() == ExprKind::Fun ? "(3)"
               : w_as_atom(as_lam(eq.lhs).binder) == w_as_atom(as_lam(eq.rhs).binder)
                   ? "(4)"
                   : "(5)";
    res.next = std::move(c);
    return res;
  }

  auto families = fixpoint_families(s.eqs);

  if (opts.garbage_free) {
    // ---- (FPS2): fixpoint equations become freshness constraints ----
    if (!families.empty()) {
      size_t i = families[0].eq_indices[0];
      const Equation& eq = s.eqs[i];
      Perm p = compose(px_eval_ground(as_susp(eq.lhs).perm, nullptr).inverse(),
                       px_eval_ground(as_susp(eq.rhs).perm, nullptr));
      UnifState c = child_of(s);
      ExprVar x = as_susp(eq.lhs).var;
      drop_eq(c.eqs, i);
      for (Atom a : p.domain())
        add_constraint(c.nabla, Freshness{w_atom(a), mk_var(x)});
      res.kind = StepResult::Kind::Next;
      res.rule = "(FPS2)";
      res.next = std::move(c);
      return res;
    }
  } else if (opts.elim_fp) {
    // ---- (ElimFP): drop a fixpoint equation redundant in the group
    // generated by the others ----
    for (const FixpointFamily& fam : families) {
      if (fam.eq_indices.size() < 2) continue;
      std::vector<Perm> perms;
      for (size_t i : fam.eq_indices) {
        const Equation& eq = s.eqs[i];
        perms.push_back(compose(px_eval_ground(as_susp(eq.lhs).perm, nullptr).inverse(),
                                px_eval_ground(as_susp(eq.rhs).perm, nullptr)));
      }
      for (size_t k = 0; k < perms.size(); ++k) {
        std::vector<Perm> gens;
        for (size_t j = 0; j < perms.size(); ++j)
          if (j != k) gens.push_back(perms[j]);
        if (group_member(perms[k], gens)) {
          UnifState c = child_of(s);
          drop_eq(c.eqs, fam.eq_indices[k]);
          res.kind = StepResult::Kind::Next;
          res.rule = "(ElimFP)";
          res.next = std::move(c);
          return res;
        }
      }
    }
  }

  // ---- (MMS): merge two non-suspension equations of one variable ----
  {
    std::map<uint32_t, size_t> first_def;
    for (size_t i = 0; i < s.eqs.size(); ++i) {
      const Equation& eq = s.eqs[i];
      if (!is_susp(eq.lhs) || is_susp(eq.rhs)) continue;
      ExprVar x = as_susp(eq.lhs).var;
      auto [it, inserted] = first_def.emplace(x.id, i);
      if (inserted) continue;
      size_t i1 = it->second, i2 = i;
      const Equation& d1 = s.eqs[i1];
      const Equation& d2 = s.eqs[i2];
      Expr l = apply_perm(px_inverse(as_susp(d1.lhs).perm, nullptr), d1.rhs);
      Expr r = apply_perm(px_inverse(as_susp(d2.lhs).perm, nullptr), d2.rhs);
      Decomposed d = decompose_pair(l, r);
      if (d.clash) return fail("Clash");
      if (d.letrec) {
        auto branches = expand_letrec(l, r);
        res.kind = StepResult::Kind::Branches;
        res.rule = "(MMS)";
        for (LetrecBranch& br : branches) {
          StepBranch sb;
          sb.rho = std::move(br.rho);
          sb.pi = std::move(br.pi);
          UnifState c = child_of(s);
          drop_eq(c.eqs, i2);  // keep the first equation
          if (br.clash) {
            c.nabla.bot = true;
          } else {
            for (Equation& e2 : br.eqs) c.eqs.push_back(std::move(e2));
            for (Freshness& f : br.fresh) add_constraint(c.nabla, std::move(f));
          }
          sb.state = std::move(c);
          res.branches.push_back(std::move(sb));
        }
        return res;
      }
      UnifState c = child_of(s);
      drop_eq(c.eqs, i2);
      for (Equation& e2 : d.eqs) c.eqs.push_back(std::move(e2));
      for (Freshness& f : d.fresh) add_constraint(c.nabla, std::move(f));
      res.kind = StepResult::Kind::Next;
      res.rule = "(MMS)";
      res.next = std::move(c);
      return res;
    }
  }

  // ---- (FPS) / (ElimX): solve a variable ----
  for (size_t i = 0; i < s.eqs.size(); ++i) {
    const Equation& eq = s.eqs[i];
    if (!is_susp(eq.lhs) || is_susp(eq.rhs)) continue;
    ExprVar x = as_susp(eq.lhs).var;
    const Expr& e = eq.rhs;
    if (occurs(e, x)) continue;  // covered by (Cycle) when fatal
    std::vector<size_t> fixpoints;
    bool blocked = false;
    for (size_t j = 0; j < s.eqs.size() && !blocked; ++j) {
      if (j == i) continue;
      if (is_fixpoint_eq(s.eqs[j]) && as_susp(s.eqs[j].lhs).var == x) {
        if (opts.garbage_free)
          blocked = true;  // (ElimX) requires X not in Gamma; (FPS2) fires first
        else
          fixpoints.push_back(j);
        continue;
      }
      if (occurs(s.eqs[j].lhs, x) || occurs(s.eqs[j].rhs, x)) blocked = true;
    }
    if (blocked) continue;
    PermPtr inv = px_inverse(as_susp(eq.lhs).perm, nullptr);
    Expr value = apply_perm(inv, e);
    UnifState c = child_of(s);
    std::vector<Equation> kept;
    std::vector<Equation> generated;
    bool clash = false;
    for (size_t j = 0; j < c.eqs.size(); ++j) {
      if (j == i) continue;
      if (std::find(fixpoints.begin(), fixpoints.end(), j) != fixpoints.end()) {
        const Equation& fp = c.eqs[j];
        Expr fl = apply_perm(as_susp(fp.lhs).perm, value);
        Expr fr = apply_perm(as_susp(fp.rhs).perm, value);
        if (!add_filtered(generated, std::move(fl), std::move(fr))) clash = true;
        continue;
      }
      kept.push_back(c.eqs[j]);
    }
    if (clash) return fail("Clash");
    for (Equation& g2 : generated) kept.push_back(std::move(g2));
    c.eqs = std::move(kept);
    c.theta.push_back(Assignment{x, value});
    res.kind = StepResult::Kind::Next;
    res.rule = opts.garbage_free ? "(ElimX)" : "(FPS)";
    res.next = std::move(c);
    return res;
  }

  // ---- (Output) ----
  {
    bool all_fix = true;
    for (const Equation& eq : s.eqs)
      if (!is_fixpoint_eq(eq)) all_fix = false;
    if (all_fix) {
      res.kind = StepResult::Kind::Done;
      res.rule = "(Output)";
      res.unifier = Unifier{s.theta, {}, s.nabla, s.eqs};
      return res;
    }
  }

  res.kind = StepResult::Kind::Stuck;
  res.rule = "stuck";
  return res;
}

UnifState initial_state(const UnifyProblemFile& problem, FreshVars& fresh,
                        const UnifyOptions& opts) {
  (void)opts;
  std::vector<Equation> eqs;
  for (auto& [l, r] : problem.equations) eqs.push_back(Equation{l, r});
  UnifState s;
  s.eqs = flatten(std::move(eqs), fresh);
  std::vector<Freshness> fs;
  for (const FreshnessIn& f : problem.freshness) fs.push_back(Freshness{f.subject, f.target});
  s.nabla = simplify(std::move(fs));
  return s;
}

namespace {

uint64_t scan_fresh_start(const UnifyProblemFile& problem) {
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
      for (char c : n.substr(2)) {
        if (c < '0' || c > '9') {
          num = false;
          break;
        }
        k = k * 10 + (c - '0');
      }
      if (num && k + 1 > start) start = k + 1;
    }
  }
  return start;
}

std::string unifier_key(const Unifier& u) { return print_unifier(u); }

}  // namespace

UnifyResult letrec_unify(const UnifyProblemFile& problem, const UnifyOptions& opts) {
  UnifyResult result;
  result.status = UnifyStatus::Unsat;

  FreshVars fresh(scan_fresh_start(problem));
  UnifState root = initial_state(problem, fresh, opts);
  for (const Equation& eq : root.eqs) {
    result.stats.input_size_counted += size_counted(eq.lhs) + size_counted(eq.rhs);
    result.stats.input_size_uncounted += size_uncounted(eq.lhs) + size_uncounted(eq.rhs);
  }
  root.trace = std::make_shared<TraceNode>(TraceNode{measure_of_eqs(root.eqs), "init", nullptr});

  std::vector<UnifState> stack{std::move(root)};
  std::set<std::string> seen_keys;
  bool overflow = false;
  size_t entered = 1;

  auto note_state = [&](const UnifState& st) {
    result.stats.max_rule_apps_per_branch =
        std::max(result.stats.max_rule_apps_per_branch, st.rule_apps);
    auto fams = fixpoint_families(st.eqs);
    for (const auto& fam : fams)
      result.stats.max_fixpoint_eqs_per_var =
          std::max(result.stats.max_fixpoint_eqs_per_var, fam.eq_indices.size());
  };

  auto admit = [&](UnifState&& st, const MeasureSnapshot& parent, const std::string& rule) {
    if (entered >= opts.budget) {
      overflow = true;
      return;
    }
    ++entered;
    MeasureSnapshot m = measure_of_eqs(st.eqs);
    if (!m.lex_less_3(parent)) ++result.stats.measure_violations;
    if (opts.record_trace)
      st.trace = std::make_shared<TraceNode>(TraceNode{m, rule, st.trace});
    note_state(st);
    stack.push_back(std::move(st));
  };

  note_state(stack[0]);

  while (!stack.empty() && !overflow) {
    UnifState s = std::move(stack.back());
    stack.pop_back();
    ++result.stats.states_explored;
    StepResult r = step(s, opts);
    ++result.stats.rule_counts[r.rule];
    MeasureSnapshot parent = measure_of_eqs(s.eqs);
    switch (r.kind) {
      case StepResult::Kind::Done: {
        std::string key = unifier_key(r.unifier);
        if (seen_keys.insert(key).second) result.unifiers.push_back(r.unifier);
        if (opts.record_trace && result.stats.measure_trace.empty()) {
          std::vector<std::pair<std::string, MeasureSnapshot>> path;
          for (auto t = s.trace; t; t = t->parent) path.push_back({t->rule, t->measure});
          std::reverse(path.begin(), path.end());
          result.stats.measure_trace = std::move(path);
        }
        if (!opts.collecting) {
          result.status = UnifyStatus::Sat;
          return result;
        }
        break;
      }
      case StepResult::Kind::Fail:
        break;
      case StepResult::Kind::Next:
        r.next.trace = s.trace;
        admit(std::move(r.next), parent, r.rule);
        break;
      case StepResult::Kind::Branches: {
        ++result.stats.branch_points;
        // depth-first in rho order: push in reverse
        for (auto it = r.branches.rbegin(); it != r.branches.rend(); ++it) {
          it->state.trace = s.trace;
          admit(std::move(it->state), parent, r.rule);
        }
        break;
      }
      case StepResult::Kind::Stuck:
        break;
    }
  }

  if (overflow)
    result.status = UnifyStatus::Overflow;
  else if (!result.unifiers.empty())
    result.status = UnifyStatus::Sat;
  return result;
}

Expr expand_theta(const std::vector<Assignment>& theta, const Expr& e) {
  auto assign = theta_map(theta);
  auto rec = [&](auto&& self, const Expr& x) -> Expr {
    switch (x.kind()) {
      case ExprKind::WLeaf:
        return x;
      case ExprKind::Susp: {
        const auto& sp = as_susp(x);
        auto it = assign.find(sp.var);
        if (it == assign.end()) return x;
        return apply_perm(sp.perm, self(self, it->second));
      }
      case ExprKind::Lam:
        return mk_lam(as_lam(x).binder, self(self, as_lam(x).body));
      case ExprKind::Fun: {
        std::vector<Expr> args;
        for (const Expr& a : as_fun(x).args) args.push_back(self(self, a));
        return mk_fun(as_fun(x).sym, std::move(args));
      }
      case ExprKind::Letrec: {
        std::vector<EnvItem> env;
        for (const EnvItem& item : as_letrec(x).env) {
          if (auto* b = std::get_if<Binding>(&item))
            env.push_back(Binding{b->binder, self(self, b->rhs)});
          else
            env.push_back(item);
        }
        return mk_letrec(std::move(env), self(self, as_letrec(x).body));
      }
    }
    return x;
  };
  return rec(rec, e);
}

std::map<ExprVar, Expr> theta_as_map(const std::vector<Assignment>& theta,
                                     const std::set<ExprVar>& vars) {
  std::map<ExprVar, Expr> out;
  for (ExprVar v : vars) out.emplace(v, expand_theta(theta, mk_var(v)));
  return out;
}

std::string print_unifier(const Unifier& u, const PermGrammar* g) {
  std::string out = "(unifier (theta";
  for (const Assignment& a : u.theta)
    out += " (?" + std::string(a.var.name()) + " " + print_expr(a.value, g) + ")";
  for (auto& [av, atom] : u.atom_theta)
    out += " (@" + std::string(av.name()) + " " + std::string(atom.name()) + ")";
  out += ") (freshness";
  for (const AtomicFreshness& af : u.nabla.atomic)
    out += " (fresh " + std::string(af.atom.name()) + " ?" + std::string(af.var.name()) + ")";
  for (const Freshness& f : u.nabla.suspended)
    out += " (fresh " + print_w(f.subject, g) + " " + print_expr(f.target, g) + ")";
  for (const FreshEq& eq : u.nabla.equalities) {
    // V1 =# W2 printed through its lambda encoding
    Expr enc = mk_lam(eq.rhs, mk_wleaf(eq.lhs));
    out += " (fresh " + print_w(eq.lhs, g) + " " + print_expr(enc, g) + ")";
  }
  out += ") (fixpoints";
  for (const Equation& eq : u.fixpoints)
    out += " (eq " + print_expr(eq.lhs, g) + " " + print_expr(eq.rhs, g) + ")";
  out += "))";
  return out;
}

std::string print_stats(const UnifStats& s) {
  std::string out = "(stats (rules";
  for (auto& [name, n] : s.rule_counts) out += " (" + name + " " + std::to_string(n) + ")";
  out += ") (states " + std::to_string(s.states_explored) + ")";
  out += " (branch-points " + std::to_string(s.branch_points) + ")";
  out += " (max-rule-apps " + std::to_string(s.max_rule_apps_per_branch) + ")";
  out += " (max-fixpoints-per-var " + std::to_string(s.max_fixpoint_eqs_per_var) + ")";
  out += " (measure-violations " + std::to_string(s.measure_violations) + ")";
  out += " (size-counted " + std::to_string(s.input_size_counted) + ")";
  out += " (size-uncounted " + std::to_string(s.input_size_uncounted) + ")";
  if (!s.measure_trace.empty()) {
    out += " (measure-trace";
    for (auto& [rule, m] : s.measure_trace)
      out += " (" + rule + " " + std::to_string(m.num_var) + " " +
             std::to_string(m.num_lr_lam_fa) + " " + std::to_string(m.num_eqs) + ")";
    out += ")";
  }
  out += ")";
  return out;
}

}  // namespace nomlet
