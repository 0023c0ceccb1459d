#pragma once

#include <random>
#include <string>
#include <vector>

#include "nomlet/alpha.hpp"
#include "nomlet/syntax.hpp"
#include "nomlet/unify.hpp"

namespace nomlet::test {

inline Expr E(const std::string& text) {
  Signature sig;
  return parse_expr_text(text, sig);
}

inline Expr E(const std::string& text, Signature& sig) {
  return parse_expr_text(text, sig);
}

inline Atom A(const std::string& name) { return mk_atom(name); }

inline UnifyProblemFile problem(const std::string& text) {
  return parse_unify_problem(text);
}

// ---- random generators (deterministic, seeded per test) ----

struct Gen {
  std::mt19937 rng;
  explicit Gen(uint64_t seed) : rng(seed) {}

  size_t pick(size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(rng); }
  bool coin(double p = 0.5) { return std::uniform_real_distribution<>(0, 1)(rng) < p; }
};

// Random ground expression over the pool; letrec environments are capped.
inline Expr random_ground(Gen& g, const std::vector<Atom>& pool, Signature& sig, size_t depth,
                          size_t max_env = 3) {
  FunSym f2 = mk_fun("f");
  FunSym g1 = mk_fun("g");
  FunSym c0 = mk_fun("c");
  sig.declare(f2, 2);
  sig.declare(g1, 1);
  sig.declare(c0, 0);
  if (depth == 0 || g.coin(0.25)) {
    if (g.coin(0.8)) return mk_atom_leaf(pool[g.pick(pool.size())]);
    return mk_fun(c0, {});
  }
  switch (g.pick(4)) {
    case 0:
      return mk_fun(f2, {random_ground(g, pool, sig, depth - 1, max_env),
                         random_ground(g, pool, sig, depth - 1, max_env)});
    case 1:
      return mk_fun(g1, {random_ground(g, pool, sig, depth - 1, max_env)});
    case 2:
      return mk_lam(w_atom(pool[g.pick(pool.size())]),
                    random_ground(g, pool, sig, depth - 1, max_env));
    default: {
      size_t n = 1 + g.pick(std::min(max_env, pool.size()));
      std::vector<size_t> idx;
      while (idx.size() < n) {
        size_t i = g.pick(pool.size());
        bool dup = false;
        for (size_t j : idx) dup |= (j == i);
        if (!dup) idx.push_back(i);
      }
      std::vector<EnvItem> env;
      for (size_t i : idx)
        env.push_back(Binding{w_atom(pool[i]), random_ground(g, pool, sig, depth - 1, max_env)});
      return mk_letrec(std::move(env), random_ground(g, pool, sig, depth - 1, max_env));
    }
  }
}

// Random garbage-free ground expression: letrec bodies reference every
// binder through a chain, then double-checked with is_garbage_free.
inline Expr random_garbage_free(Gen& g, const std::vector<Atom>& pool, Signature& sig,
                                size_t depth) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    Expr e = random_ground(g, pool, sig, depth);
    if (is_garbage_free(e)) return e;
  }
  return mk_atom_leaf(pool[0]);
}

inline Perm random_perm(Gen& g, const std::vector<Atom>& pool, size_t swaps) {
  Perm p;
  for (size_t i = 0; i < swaps; ++i) {
    Atom a = pool[g.pick(pool.size())];
    Atom b = pool[g.pick(pool.size())];
    p = compose(Perm::swap(a, b), p);
  }
  return p;
}

// ---- unifier verification (soundness, Def 4.3(i) + input equations) ----
// Instantiates every variable not bound by theta with one shared fresh atom,
// discharges FIX and the freshness constraints, and checks the original
// equations modulo alpha.
inline bool verify_unifier(const UnifyProblemFile& input, const Unifier& u) {
  std::set<ExprVar> vars;
  for (auto& [l, r] : input.equations) {
    collect_expr_vars(l, vars);
    collect_expr_vars(r, vars);
  }
  for (auto& f : input.freshness) collect_expr_vars(f.target, vars);
  for (const Assignment& a : u.theta) {
    vars.insert(a.var);
    collect_expr_vars(a.value, vars);
  }
  for (const Equation& eq : u.fixpoints) {
    collect_expr_vars(eq.lhs, vars);
    collect_expr_vars(eq.rhs, vars);
  }

  AtomSet atoms;
  for (auto& [l, r] : input.equations) {
    collect_atoms(l, nullptr, atoms);
    collect_atoms(r, nullptr, atoms);
  }
  for (auto& f : input.freshness) collect_atoms(f.target, nullptr, atoms);
  for (const Assignment& a : u.theta) collect_atoms(a.value, nullptr, atoms);
  for (const AtomicFreshness& af : u.nabla.atomic) atoms.insert(af.atom);
  for (const Equation& eq : u.fixpoints) {
    collect_atoms(eq.lhs, nullptr, atoms);
    collect_atoms(eq.rhs, nullptr, atoms);
  }
  Atom fresh = fresh_atom(atoms);

  // ground instantiation: theta chain, then the shared fresh atom
  auto ground_of = [&](ExprVar x) {
    Expr e = expand_theta(u.theta, mk_var(x));
    std::set<ExprVar> rest;
    collect_expr_vars(e, rest);
    for (ExprVar v : rest) e = subst_var(e, v, mk_atom_leaf(fresh));
    return e;
  };
  std::map<ExprVar, Expr> rho;
  for (ExprVar v : vars) rho.emplace(v, ground_of(v));

  auto instantiate = [&](Expr e) {
    for (auto& [x, val] : rho) e = subst_var(e, x, val);
    return e;
  };

  // FIX discharged by the fresh atom: dom of the permutations never moves it
  for (const Equation& eq : u.fixpoints) {
    Expr l = instantiate(eq.lhs);
    Expr r = instantiate(eq.rhs);
    if (!is_ground(l) || !is_ground(r) || !alpha_eq(l, r)) return false;
  }
  // final freshness context
  for (const AtomicFreshness& af : u.nabla.atomic) {
    auto it = rho.find(af.var);
    Expr val = it == rho.end() ? mk_atom_leaf(fresh) : it->second;
    if (free_atoms(val).count(af.atom)) return false;
  }
  // original equations and constraints
  for (auto& [l, r] : input.equations) {
    Expr li = instantiate(l);
    Expr ri = instantiate(r);
    if (!is_ground(li) || !is_ground(ri) || !alpha_eq(li, ri)) return false;
  }
  for (auto& f : input.freshness) {
    if (!w_is_atom(f.subject)) return false;
    Expr t = instantiate(f.target);
    if (free_atoms(t).count(w_as_atom(f.subject))) return false;
  }
  return true;
}

}  // namespace nomlet::test
