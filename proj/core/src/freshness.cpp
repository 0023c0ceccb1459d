#include "nomlet/freshness.hpp"

#include <cassert>

#include "nomlet/grammar.hpp"

namespace nomlet {

namespace {

void push_suspended(FreshnessContext& ctx, Freshness f) {
  for (const Freshness& old : ctx.suspended)
    if (w_cmp(old.subject, f.subject) == 0 && cmp(old.target, f.target) == 0) return;
  ctx.suspended.push_back(std::move(f));
}

// One simplification step on a single constraint with a bare subject.
// Appends derived constraints to `work` or atomic results to `ctx`.
void step(FreshnessContext& ctx, std::vector<Freshness>& work, Freshness f, PermGrammar* g) {
  if (ctx.bot) return;
  // pi.V # e  ~  V # pi^-1.e
  if (f.subject.perm) {
    PermPtr inv = px_inverse(f.subject.perm, g);
    f = Freshness{W{nullptr, f.subject.v}, apply_perm(inv, f.target, g)};
  }
  const bool subject_is_atom = is_atom(f.subject.v);
  const Expr& t = f.target;
  switch (t.kind()) {
    case ExprKind::WLeaf: {
      const W& w = as_wleaf(t).w;
      if (subject_is_atom && w_is_atom(w)) {
        if (std::get<Atom>(f.subject.v) == w_as_atom(w)) ctx.bot = true;  // a#a
        return;                                                           // a#b
      }
      if (w_equal(f.subject, w)) {  // V # V is unsatisfiable
        ctx.bot = true;
        return;
      }
      push_suspended(ctx, std::move(f));
      return;
    }
    case ExprKind::Susp: {
      const auto& s = as_susp(t);
      if (subject_is_atom && px_is_ground(s.perm)) {
        Atom a = std::get<Atom>(f.subject.v);
        ctx.atomic.insert(AtomicFreshness{px_eval_ground(s.perm, g).inverse().apply(a), s.var});
        return;
      }
      push_suspended(ctx, std::move(f));
      return;
    }
    case ExprKind::Lam: {
      const auto& l = as_lam(t);
      if (w_equal(f.subject, l.binder)) return;  // V # lam V.e
      if (subject_is_atom && w_is_atom(l.binder)) {
        work.push_back(Freshness{f.subject, l.body});
        return;
      }
      push_suspended(ctx, std::move(f));
      return;
    }
    case ExprKind::Fun: {
      // valid for any subject
      for (const Expr& a : as_fun(t).args) work.push_back(Freshness{f.subject, a});
      return;
    }
    case ExprKind::Letrec: {
      const auto& l = as_letrec(t);
      bool all_plain = true;
      for (const EnvItem& item : l.env) {
        if (auto* b = std::get_if<Binding>(&item)) {
          if (w_equal(f.subject, b->binder)) return;  // subject is a binder
          if (!w_is_atom(b->binder)) all_plain = false;
        } else {
          all_plain = false;
        }
      }
      if (subject_is_atom && all_plain) {
        for (const EnvItem& item : l.env)
          work.push_back(Freshness{f.subject, std::get<Binding>(item).rhs});
        work.push_back(Freshness{f.subject, l.body});
        return;
      }
      push_suspended(ctx, std::move(f));
      return;
    }
  }
}

void run(FreshnessContext& ctx, std::vector<Freshness> work, PermGrammar* g) {
  while (!work.empty() && !ctx.bot) {
    Freshness f = std::move(work.back());
    work.pop_back();
    step(ctx, work, std::move(f), g);
  }
}

void simplify_equality(FreshnessContext& ctx, FreshEq eq, PermGrammar* g) {
  if (ctx.bot) return;
  if (w_is_atom(eq.lhs) && w_is_atom(eq.rhs)) {
    if (!(w_as_atom(eq.lhs) == w_as_atom(eq.rhs))) ctx.bot = true;
    return;  // satisfied when equal
  }
  if (w_equal(eq.lhs, eq.rhs)) return;
  for (const FreshEq& old : ctx.equalities)
    if (w_cmp(old.lhs, eq.lhs) == 0 && w_cmp(old.rhs, eq.rhs) == 0) return;
  ctx.equalities.push_back(std::move(eq));
}

}  // namespace

FreshnessContext simplify(std::vector<Freshness> constraints, PermGrammar* g) {
  FreshnessContext ctx;
  run(ctx, std::move(constraints), g);
  return ctx;
}

void add_constraint(FreshnessContext& ctx, Freshness f, PermGrammar* g) {
  run(ctx, {std::move(f)}, g);
}

void add_equality(FreshnessContext& ctx, FreshEq eq, PermGrammar* g) {
  simplify_equality(ctx, std::move(eq), g);
}

void merge_into(FreshnessContext& ctx, const FreshnessContext& other, PermGrammar* g) {
  if (other.bot) {
    ctx.bot = true;
    return;
  }
  ctx.atomic.insert(other.atomic.begin(), other.atomic.end());
  run(ctx, other.suspended, g);
  for (const FreshEq& eq : other.equalities) simplify_equality(ctx, eq, g);
}

void subst_expr_var(FreshnessContext& ctx, ExprVar x, const Expr& value, PermGrammar* g) {
  if (ctx.bot) return;
  std::vector<Freshness> work;
  std::set<AtomicFreshness> kept;
  for (const AtomicFreshness& af : ctx.atomic) {
    if (af.var == x)
      work.push_back(Freshness{w_atom(af.atom), value});
    else
      kept.insert(af);
  }
  ctx.atomic = std::move(kept);
  std::vector<Freshness> susp = std::move(ctx.suspended);
  ctx.suspended.clear();
  for (Freshness& f : susp)
    work.push_back(Freshness{f.subject, subst_var(f.target, x, value, g)});
  run(ctx, std::move(work), g);
}

void subst_atom_var_ctx(FreshnessContext& ctx, AtomVar a, Atom b, PermGrammar* g) {
  if (ctx.bot) return;
  std::vector<Freshness> work = std::move(ctx.suspended);
  ctx.suspended.clear();
  for (Freshness& f : work) {
    f.subject = w_subst_atom_var(f.subject, a, b, g);
    f.target = subst_atom_var(f.target, a, b, g);
  }
  std::vector<FreshEq> eqs = std::move(ctx.equalities);
  ctx.equalities.clear();
  run(ctx, std::move(work), g);
  for (FreshEq& eq : eqs) {
    eq.lhs = w_subst_atom_var(eq.lhs, a, b, g);
    eq.rhs = w_subst_atom_var(eq.rhs, a, b, g);
    simplify_equality(ctx, std::move(eq), g);
  }
}

bool check_ground(const std::vector<Freshness>& constraints,
                  const std::map<ExprVar, Expr>& rho) {
  for (const Freshness& f : constraints) {
    assert(w_is_atom(f.subject));
    Expr t = f.target;
    for (const auto& [x, v] : rho) t = subst_var(t, x, v);
    assert(is_ground(t));
    if (free_atoms(t).count(w_as_atom(f.subject))) return false;
  }
  return true;
}

namespace {

void collect_ctx_vars_atoms(const FreshnessContext& ctx, const PermGrammar* g,
                            std::set<AtomVar>& avars, AtomSet& atoms) {
  for (const AtomicFreshness& af : ctx.atomic) atoms.insert(af.atom);
  for (const Freshness& f : ctx.suspended) {
    w_collect_atom_vars(f.subject, g, avars);
    w_collect_atoms(f.subject, g, atoms);
    collect_atom_vars(f.target, g, avars);
    collect_atoms(f.target, g, atoms);
  }
  for (const FreshEq& eq : ctx.equalities) {
    w_collect_atom_vars(eq.lhs, g, avars);
    w_collect_atoms(eq.lhs, g, atoms);
    w_collect_atom_vars(eq.rhs, g, avars);
    w_collect_atoms(eq.rhs, g, atoms);
  }
}

template <typename OnWitness>
void enumerate_assignments(const FreshnessContext& ctx, PermGrammar* g,
                           const std::function<bool(const FreshnessContext&)>& accept,
                           const OnWitness& on_witness) {
  std::set<AtomVar> avars;
  AtomSet atoms;
  collect_ctx_vars_atoms(ctx, g, avars, atoms);
  std::vector<AtomVar> vars(avars.begin(), avars.end());
  // pool: existing atoms plus one fresh atom per atom variable
  std::vector<Atom> pool(atoms.begin(), atoms.end());
  AtomSet avoid = atoms;
  for (size_t i = 0; i < vars.size(); ++i) {
    Atom fresh = fresh_atom(avoid);
    avoid.insert(fresh);
    pool.push_back(fresh);
  }
  std::map<AtomVar, Atom> assignment;
  auto rec = [&](auto&& self, size_t i, const FreshnessContext& cur) -> bool {
    if (cur.bot) return false;
    if (i == vars.size()) {
      assert(cur.suspended.empty() && cur.equalities.empty());
      if (accept && !accept(cur)) return false;
      return on_witness(AvWitness{assignment});
    }
    for (Atom a : pool) {
      FreshnessContext next = cur;
      subst_atom_var_ctx(next, vars[i], a, g);
      assignment[vars[i]] = a;
      if (self(self, i + 1, next)) return true;
      assignment.erase(vars[i]);
    }
    return false;
  };
  rec(rec, 0, ctx);
}

}  // namespace

std::optional<AvWitness> av_satisfiable(
    const FreshnessContext& ctx, PermGrammar* g,
    const std::function<bool(const FreshnessContext&)>& accept) {
  std::optional<AvWitness> out;
  enumerate_assignments(ctx, g, accept, [&](AvWitness w) {
    out = std::move(w);
    return true;  // stop at the first witness
  });
  return out;
}

std::vector<AvWitness> av_witnesses(
    const FreshnessContext& ctx, PermGrammar* g,
    const std::function<bool(const FreshnessContext&)>& accept) {
  std::vector<AvWitness> out;
  enumerate_assignments(ctx, g, accept, [&](AvWitness w) {
    out.push_back(std::move(w));
    return false;  // keep enumerating
  });
  return out;
}

}  // namespace nomlet
