// Acceptance suite: one pass/fail line per criterion, run as part of ctest.
// Every tolerance and threshold is pinned here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "nomlet/alpha.hpp"
#include "nomlet/env_match.hpp"
#include "nomlet/match.hpp"
#include "nomlet/oracle.hpp"
#include "nomlet/syntax.hpp"
#include "nomlet/unify.hpp"
#include "nomlet/unify_av.hpp"
#include "testutil.hpp"

using namespace nomlet;
using nomlet::test::A;
using nomlet::test::E;
using nomlet::test::Gen;
using nomlet::test::problem;
using nomlet::test::verify_unifier;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << (detail.tellp() > 0 ? "; " : "") << what;
    }
  }
};

// ---- shared graph helpers ----

Graph complete_graph(int n) {
  Graph g;
  for (int i = 0; i < n; ++i) g.names.push_back("v" + std::to_string(i));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.edges.push_back({i, j});
  return g;
}

Graph cycle_graph(int n) {
  Graph g;
  for (int i = 0; i < n; ++i) g.names.push_back("v" + std::to_string(i));
  for (int i = 0; i < n; ++i) {
    int j = (i + 1) % n;
    g.edges.push_back({std::min(i, j), std::max(i, j)});
  }
  return g;
}

Graph disjoint_union(const Graph& a, const Graph& b) {
  Graph g = a;
  int off = static_cast<int>(a.num_vertices());
  for (auto& n : b.names) g.names.push_back(n + "x");
  for (auto& [u, v] : b.edges) g.edges.push_back({u + off, v + off});
  return g;
}

Graph petersen() {
  Graph g;
  for (int i = 0; i < 10; ++i) g.names.push_back("v" + std::to_string(i));
  for (int i = 0; i < 5; ++i) {
    int j = (i + 1) % 5;
    g.edges.push_back({std::min(i, j), std::max(i, j)});
    int k = 5 + ((i + 2) % 5);
    g.edges.push_back({std::min(5 + i, k), std::max(5 + i, k)});
    g.edges.push_back({i, 5 + i});
  }
  return g;
}

Graph prism(int n) {  // C_n x K_2, 3-regular on 2n vertices
  Graph g;
  for (int i = 0; i < 2 * n; ++i) g.names.push_back("v" + std::to_string(i));
  for (int i = 0; i < n; ++i) {
    int j = (i + 1) % n;
    g.edges.push_back({std::min(i, j), std::max(i, j)});
    g.edges.push_back({std::min(n + i, n + j), std::max(n + i, n + j)});
    g.edges.push_back({i, n + i});
  }
  return g;
}

Graph cube() {  // Q3
  Graph g;
  for (int i = 0; i < 8; ++i) g.names.push_back("v" + std::to_string(i));
  for (int i = 0; i < 8; ++i)
    for (int b = 0; b < 3; ++b) {
      int j = i ^ (1 << b);
      if (i < j) g.edges.push_back({i, j});
    }
  return g;
}

Graph k33() {
  Graph g;
  for (int i = 0; i < 6; ++i) g.names.push_back("v" + std::to_string(i));
  for (int i = 0; i < 3; ++i)
    for (int j = 3; j < 6; ++j) g.edges.push_back({i, j});
  return g;
}

Graph relabel(const Graph& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<int> perm(g.num_vertices());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Graph out;
  out.names.assign(g.num_vertices(), "");
  for (size_t i = 0; i < g.num_vertices(); ++i) out.names[perm[i]] = g.names[i] + "r";
  for (auto& [u, v] : g.edges) {
    int a2 = perm[u], b2 = perm[v];
    out.edges.push_back({std::min(a2, b2), std::max(a2, b2)});
  }
  return out;
}

// ---- random problem corpus (criteria 3 and 4) ----

// Abstracts random subtrees of a ground expression into fresh variables.
Expr abstract_vars(Gen& g, const Expr& e, int& counter, double prob) {
  if (g.coin(prob)) return mk_var(mk_expr_var("V" + std::to_string(counter++)));
  switch (e.kind()) {
    case ExprKind::WLeaf:
    case ExprKind::Susp:
      return e;
    case ExprKind::Lam:
      return mk_lam(as_lam(e).binder, abstract_vars(g, as_lam(e).body, counter, prob));
    case ExprKind::Fun: {
      std::vector<Expr> args;
      for (const Expr& a : as_fun(e).args) args.push_back(abstract_vars(g, a, counter, prob));
      return mk_fun(as_fun(e).sym, std::move(args));
    }
    case ExprKind::Letrec: {
      std::vector<EnvItem> env;
      for (const EnvItem& item : as_letrec(e).env) {
        const auto& b = std::get<Binding>(item);
        env.push_back(Binding{b.binder, abstract_vars(g, b.rhs, counter, prob)});
      }
      return mk_letrec(std::move(env), abstract_vars(g, as_letrec(e).body, counter, prob));
    }
  }
  return e;
}

std::vector<UnifyProblemFile> random_corpus(size_t count, uint64_t seed) {
  Gen g(seed);
  std::vector<Atom> pool{A("a"), A("b"), A("c"), A("d"), A("e"), A("f")};
  std::vector<UnifyProblemFile> corpus;
  while (corpus.size() < count) {
    Signature sig;
    Expr t = nomlet::test::random_ground(g, pool, sig, 4, 3);
    if (size_counted(t) > 60) continue;
    int counter = 0;
    // mostly solvable: two abstractions of the same ground term; a quarter
    // of the problems rename one side first, which usually breaks them
    Expr base = g.coin(0.75) ? t : apply_perm(nomlet::test::random_perm(g, pool, 2), t);
    Expr lhs = abstract_vars(g, base, counter, 0.15);
    Expr rhs = g.coin(0.7) ? t : abstract_vars(g, t, counter, 0.1);
    UnifyProblemFile pf;
    pf.equations.push_back({lhs, rhs});
    if (g.coin(0.3)) {
      Expr t2 = nomlet::test::random_ground(g, pool, sig, 2, 2);
      Expr l2 = abstract_vars(g, t2, counter, 0.2);
      pf.equations.push_back({l2, t2});
    }
    size_t s = 0;
    for (auto& [l, r] : pf.equations) s += size_counted(l) + size_counted(r);
    if (s > 120) continue;
    corpus.push_back(std::move(pf));
  }
  return corpus;
}

size_t expr_depth(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::WLeaf:
    case ExprKind::Susp:
      return 1;
    case ExprKind::Lam:
      return 1 + expr_depth(as_lam(e).body);
    case ExprKind::Fun: {
      size_t d = 0;
      for (const Expr& a : as_fun(e).args) d = std::max(d, expr_depth(a));
      return 1 + d;
    }
    case ExprKind::Letrec: {
      size_t d = expr_depth(as_letrec(e).body);
      for (const EnvItem& item : as_letrec(e).env)
        d = std::max(d, expr_depth(std::get<Binding>(item).rhs));
      return 1 + d;
    }
  }
  return 1;
}

// 1: the paper's worked examples reproduce exactly.
Check criterion1() {
  Check c;
  // letrec unification example: solvable, with pi = {b->a, c->b, a->c} on
  // the identity pairing branch
  UnifyProblemFile ex44 = problem(
      "(problem (eq (letrec ((a (pair a b)) (b (pair a b))) b)"
      "             (letrec ((b (pair b c)) (c (pair b c))) c)))");
  auto r44 = letrec_unify(ex44, UnifyOptions{.collecting = true});
  c.expect(r44.status == UnifyStatus::Sat, "letrec example not solvable");
  for (const Unifier& u : r44.unifiers)
    c.expect(verify_unifier(ex44, u), "letrec example unifier fails verification");
  {
    FreshVars fresh(1);
    UnifyOptions opts;
    UnifState s = initial_state(ex44, fresh, opts);
    StepResult sr = step(s, opts);
    while (sr.kind == StepResult::Kind::Next) sr = step(sr.next, opts);
    bool found = false;
    if (sr.kind == StepResult::Kind::Branches) {
      for (const StepBranch& br : sr.branches) {
        if (br.rho == std::vector<size_t>{0, 1} && br.pi.apply(A("b")) == A("a") &&
            br.pi.apply(A("c")) == A("b") && br.pi.apply(A("a")) == A("c"))
          found = true;
      }
    }
    c.expect(found, "identity branch pi mismatch");
  }

  // beta-redex matching example
  auto lbeta = letrec_match(
      parse_match_problem("(match (le (app (lam c ?X1) ?X2) (app (lam a a) (lam b b))))"),
      MatchOptions{.collecting = true});
  c.expect(lbeta.status == MatchStatus::Sat, "lbeta match unsolvable");
  bool lbeta_ok = false;
  for (auto& s : lbeta.solutions)
    if (equal(s.subst.at(mk_expr_var("X1")), E("c")) &&
        alpha_eq(s.subst.at(mk_expr_var("X2")), E("(lam b b)")))
      lbeta_ok = true;
  c.expect(lbeta_ok, "lbeta images wrong");

  // failing lambda match example
  auto fail62 = letrec_match(parse_match_problem("(match (le (lam c c) (lam b a)))"));
  c.expect(fail62.status == MatchStatus::Unsat, "lam c c vs lam b a should fail");

  // atom-variable pair: first unsolvable, second solvable
  auto av1 = letrec_unify_av(problem(
      "(problem (eq (app (letrec ((@A a) (@B a)) @B) @A)"
      "             (app (letrec ((@A a) (@B a)) @B) @B)))"));
  c.expect(av1.status == UnifyStatus::Unsat, "atom-variable example 1 should be unsat");
  auto av2 = letrec_unify_av(problem(
      "(problem (eq (app (letrec ((@A a) (@C a)) @C) @A)"
      "             (app (letrec ((@A a) (@D a)) @D) @B)))"));
  c.expect(av2.status == UnifyStatus::Sat, "atom-variable example 2 should be sat");

  // environment merge match
  auto llet = env_match(parse_match_problem(
                            "(match (le (letrec (%E1) (letrec (%E2) ?X))"
                            "           (letrec ((a (0)) (b (1)))"
                            "                   (letrec ((c (t3 a b c))) c))))"),
                        MatchOptions{.collecting = true});
  c.expect(llet.status == MatchStatus::Sat, "environment merge match unsolvable");
  bool llet_ok = false;
  for (const EnvMatchSolution& s : llet.solutions) {
    auto e1 = s.env_images.find(mk_env_var("E1"));
    auto e2 = s.env_images.find(mk_env_var("E2"));
    if (e1 == s.env_images.end() || e2 == s.env_images.end()) continue;
    if (e1->second.size() != 2 || e2->second.size() != 1) continue;
    bool has0 = false, has1 = false;
    for (const Binding& b : e1->second) {
      if (alpha_eq(b.rhs, E("(0)"))) has0 = true;
      if (alpha_eq(b.rhs, E("(1)"))) has1 = true;
    }
    auto x = s.var_images.find(mk_expr_var("X"));
    if (has0 && has1 && x != s.var_images.end() &&
        x->second.kind() == ExprKind::WLeaf &&
        w_as_atom(as_wleaf(x->second).w) == w_as_atom(e2->second[0].binder))
      llet_ok = true;
  }
  c.expect(llet_ok, "environment images wrong");
  return c;
}

// 2: the fixpoint blow-up family with and without redundancy elimination.
Check criterion2() {
  Check c;
  std::mt19937 rng(2026);
  for (size_t n = 3; n <= 8; ++n) {
    std::vector<Atom> atoms;
    for (size_t i = 0; i < 3 * (n + 1); ++i)
      atoms.push_back(A("a" + std::to_string(i)));
    auto rand_perm = [&](int swaps) {
      Perm p;
      std::uniform_int_distribution<size_t> d(0, atoms.size() - 1);
      for (int s = 0; s < swaps; ++s)
        p = compose(Perm::swap(atoms[d(rng)], atoms[d(rng)]), p);
      return p;
    };
    // choose pi and rho_2..rho_n so that all 2^(n-1) subset conjugates
    // rho_S^-1 pi rho_S are pairwise distinct
    Perm pi;
    std::vector<Perm> rhos(n + 1);
    bool distinct = false;
    for (int attempt = 0; attempt < 2000 && !distinct; ++attempt) {
      pi = rand_perm(5);
      for (size_t i = 2; i <= n; ++i) rhos[i] = rand_perm(6);
      std::set<Perm> seen;
      distinct = true;
      for (size_t mask = 0; mask < (size_t{1} << (n - 1)); ++mask) {
        Perm rho;  // composition of the selected rho_i, descending index
        for (size_t i = n; i >= 2; --i)
          if (mask & (size_t{1} << (i - 2))) rho = compose(rho, rhos[i]);
        if (!seen.insert(compose(rho.inverse(), compose(pi, rho))).second) {
          distinct = false;
          break;
        }
      }
    }
    c.expect(distinct, "no distinct conjugate family found at n=" + std::to_string(n));
    if (!distinct) continue;

    UnifyProblemFile pf;
    std::vector<ExprVar> xs;
    for (size_t i = 0; i <= n; ++i) xs.push_back(mk_expr_var("X" + std::to_string(i)));
    FunSym f = mk_fun("f");
    pf.equations.push_back({mk_var(xs[n]), mk_susp(px_ground(pi), xs[n])});
    for (size_t i = n; i >= 2; --i)
      pf.equations.push_back(
          {mk_var(xs[i]),
           mk_fun(f, {mk_var(xs[i - 1]), mk_susp(px_ground(rhos[i]), xs[i - 1])})});

    auto off = letrec_unify(pf, UnifyOptions{.collecting = true, .elim_fp = false});
    c.expect(off.status == UnifyStatus::Sat, "family unsat at n=" + std::to_string(n));
    size_t want = size_t{1} << (n - 1);
    size_t got = off.unifiers.empty() ? 0 : off.unifiers[0].fixpoints.size();
    c.expect(got >= want, "only " + std::to_string(got) + " fixpoint equations at n=" +
                              std::to_string(n) + ", want >= " + std::to_string(want));

    auto on = letrec_unify(pf, UnifyOptions{.collecting = true});
    c.expect(on.status == UnifyStatus::Sat, "family unsat with ElimFP");
    double s = static_cast<double>(on.stats.input_size_counted);
    double bound = s * std::log2(std::max(s, 2.0));
    c.expect(static_cast<double>(on.stats.max_fixpoint_eqs_per_var) <= bound,
             "fixpoint family exceeded S log S at n=" + std::to_string(n));
  }
  return c;
}

// 3: instrumented rule-application bound over the random corpus.
Check criterion3(const std::vector<UnifyProblemFile>& corpus) {
  Check c;
  for (size_t i = 0; i < corpus.size(); ++i) {
    auto r = letrec_unify(corpus[i], UnifyOptions{.collecting = false, .budget = 400000});
    double s = static_cast<double>(std::max<size_t>(r.stats.input_size_counted, 2));
    double bound = 10.0 * s * s * s * std::log2(s);
    c.expect(static_cast<double>(r.stats.max_rule_apps_per_branch) <= bound,
             "rule applications exceeded the bound on problem " + std::to_string(i));
    c.expect(r.stats.measure_violations == 0,
             "measure increase on problem " + std::to_string(i));
    c.expect(r.status != UnifyStatus::Overflow,
             "budget overflow on problem " + std::to_string(i));
  }
  return c;
}

// 4: every emitted unifier/match verifies.
Check criterion4(const std::vector<UnifyProblemFile>& corpus) {
  Check c;
  size_t verified = 0;
  for (size_t i = 0; i < corpus.size(); ++i) {
    auto r = letrec_unify(corpus[i], UnifyOptions{.collecting = true, .budget = 100000});
    if (r.status == UnifyStatus::Overflow) continue;
    for (const Unifier& u : r.unifiers) {
      ++verified;
      c.expect(verify_unifier(corpus[i], u),
               "unifier fails verification on problem " + std::to_string(i));
    }
  }
  // matching corpus: patterns abstracted from ground targets
  Gen g(404);
  std::vector<Atom> pool{A("a"), A("b"), A("c"), A("d")};
  for (int i = 0; i < 150; ++i) {
    Signature sig;
    Expr t = nomlet::test::random_ground(g, pool, sig, 3, 3);
    int counter = 0;
    Expr pat = abstract_vars(g, t, counter, 0.2);
    MatchProblemFile pf;
    pf.equations.push_back({pat, t});
    auto r = letrec_match(pf, MatchOptions{.collecting = true, .budget = 100000});
    c.expect(r.status == MatchStatus::Sat, "abstracted pattern must match its origin");
    for (const MatchSolution& s : r.solutions) {
      ++verified;
      Expr inst = pat;
      for (auto& [x, v] : s.subst) inst = subst_var(inst, x, v);
      c.expect(is_ground(inst) && alpha_eq(inst, t),
               "match substitution fails verification");
    }
  }
  c.expect(verified > 300, "verification corpus too small");
  return c;
}

// 5: completeness against the brute-force oracle on exhaustive small problems.
Check criterion5() {
  Check c;
  Signature sig;
  sig.declare(mk_fun("f"), 2);
  sig.declare(mk_fun("g"), 1);
  sig.declare(mk_fun("c"), 0);
  std::vector<Atom> pool{A("a"), A("b"), A("c")};
  auto candidates = oracle::enum_ground_exprs(pool, sig, 2, 1);

  // exhaustive pattern family over atoms {a,b}, variables {X,Y}
  std::vector<Expr> leaves{E("a"), E("b"), E("?X"), E("?Y"), E("(c)")};
  std::vector<Expr> patterns = leaves;
  FunSym f2 = mk_fun("f"), g1 = mk_fun("g");
  for (const Expr& u : leaves)
    for (const Expr& v : leaves) patterns.push_back(mk_fun(f2, {u, v}));
  for (const Expr& u : leaves) {
    patterns.push_back(mk_fun(g1, {u}));
    patterns.push_back(mk_lam(w_atom(A("a")), u));
    patterns.push_back(mk_lam(w_atom(A("b")), u));
    for (const Expr& v : leaves)
      patterns.push_back(mk_letrec({Binding{w_atom(A("a")), u}}, v));
  }
  patterns.push_back(E("(perm ((a b)) ?X)"));
  patterns.push_back(E("(perm ((a b)) ?Y)"));

  size_t problems = 0, skipped = 0;
  for (size_t li = 0; li < patterns.size() && c.ok; ++li) {
    for (size_t ri = li; ri < patterns.size() && c.ok; ++ri) {
      const Expr& l = patterns[li];
      const Expr& r = patterns[ri];
      std::set<ExprVar> vars;
      collect_expr_vars(l, vars);
      collect_expr_vars(r, vars);
      if (vars.empty()) continue;  // ground-vs-ground is alpha-equivalence
      ++problems;
      UnifyProblemFile pf;
      pf.equations.push_back({l, r});
      auto res = letrec_unify(pf, UnifyOptions{.collecting = true, .budget = 50000});
      if (res.status == UnifyStatus::Overflow) {
        ++skipped;
        continue;
      }
      auto oracle_sols = oracle::enum_ground_solutions(pf.equations, {}, candidates);
      c.expect((res.status == UnifyStatus::Sat) == !oracle_sols.empty(),
               "solvability mismatch on " + print_expr(l) + " = " + print_expr(r));

      // expand each unifier into its set of within-bounds instances
      std::vector<std::map<ExprVar, Expr>> instances;
      for (const Unifier& u : res.unifiers) {
        std::set<ExprVar> rel;
        for (ExprVar v : vars) {
          Expr ev = expand_theta(u.theta, mk_var(v));
          collect_expr_vars(ev, rel);
        }
        for (const Equation& fx : u.fixpoints) collect_expr_vars(fx.lhs, rel);
        for (const AtomicFreshness& af : u.nabla.atomic) rel.insert(af.var);
        std::vector<ExprVar> rv(rel.begin(), rel.end());
        if (rv.size() > 2) {
          c.expect(false, "unifier with more than two free variables (unexpected)");
          continue;
        }
        std::map<ExprVar, Expr> assign;
        auto emit = [&]() {
          for (const Equation& fx : u.fixpoints) {
            ExprVar v = as_susp(fx.lhs).var;
            Expr val = assign.at(v);
            if (!alpha_eq(apply_perm(as_susp(fx.lhs).perm, val),
                          apply_perm(as_susp(fx.rhs).perm, val)))
              return;
          }
          for (const AtomicFreshness& af : u.nabla.atomic) {
            auto it = assign.find(af.var);
            if (it != assign.end() && free_atoms(it->second).count(af.atom)) return;
          }
          std::map<ExprVar, Expr> inst;
          for (ExprVar v : vars) {
            Expr ev = expand_theta(u.theta, mk_var(v));
            for (auto& [w2, val] : assign) ev = subst_var(ev, w2, val);
            if (!is_ground(ev)) return;
            // the comparison holds within the oracle's candidate universe
            if (expr_depth(ev) > 2) return;
            inst.emplace(v, ev);
          }
          instances.push_back(std::move(inst));
        };
        auto rec = [&](auto&& self, size_t i) -> void {
          if (i == rv.size()) {
            emit();
            return;
          }
          for (const Expr& cand : candidates) {
            assign[rv[i]] = cand;
            self(self, i + 1);
          }
          assign.erase(rv[i]);
        };
        rec(rec, 0);
      }

      auto same = [&](const std::map<ExprVar, Expr>& m1, const std::map<ExprVar, Expr>& m2) {
        for (ExprVar v : vars) {
          if (!m1.count(v) || !m2.count(v)) return false;
          if (!alpha_eq(m1.at(v), m2.at(v))) return false;
        }
        return true;
      };
      for (auto& mu : oracle_sols) {
        bool covered = false;
        for (auto& nu : instances)
          if (same(mu, nu)) {
            covered = true;
            break;
          }
        if (!covered) {
          c.expect(false, "oracle solution not covered on " + print_expr(l) + " = " +
                              print_expr(r));
          break;
        }
      }
      for (auto& nu : instances) {
        bool sound = false;
        for (auto& mu : oracle_sols)
          if (same(nu, mu)) {
            sound = true;
            break;
          }
        if (!sound) {
          c.expect(false, "unifier instance outside the oracle set on " + print_expr(l) +
                              " = " + print_expr(r));
          break;
        }
      }
    }
  }
  c.expect(problems > 2000, "exhaustive family too small: " + std::to_string(problems));
  c.expect(skipped < problems / 100 + 1, "too many overflow skips");
  return c;
}

// 6: garbage-free expressions: fixpoint permutations are exactly the fresh ones.
Check criterion6() {
  Check c;
  Gen g(606);
  std::vector<Atom> pool{A("a"), A("b"), A("c"), A("d"), A("e")};
  Signature sig;
  size_t checked = 0, nontrivial = 0;
  while (checked < 1000) {
    Expr e = nomlet::test::random_garbage_free(g, pool, sig, 4);
    Perm p = nomlet::test::random_perm(g, pool, 1 + g.pick(3));
    ++checked;
    bool fix = alpha_eq(apply_perm(p, e), e);
    AtomSet fa = free_atoms(e);
    bool disjoint = true;
    for (Atom a : p.domain())
      if (fa.count(a)) disjoint = false;
    if (!disjoint) ++nontrivial;
    if (fix != disjoint) {
      c.expect(false, "garbage-free fixpoint property violated on " + print_expr(e));
      break;
    }
  }
  c.expect(nontrivial > 100, "corpus exercised too few non-fresh permutations");
  // the two-binding counterexample: pi.e ~ e although dom(pi) meets FA(e)
  Expr t = E("(letrec ((c a) (d b)) (true))");
  Perm ab = Perm::swap(A("a"), A("b"));
  c.expect(alpha_eq(apply_perm(ab, t), t), "counterexample must be a fixpoint");
  c.expect(free_atoms(t).count(A("a")) && free_atoms(t).count(A("b")),
           "counterexample has a and b free");
  c.expect(!is_garbage_free(t), "counterexample must contain garbage");
  return c;
}

// 7: hardness encoders agree with the exhaustive graph oracles.
Check criterion7() {
  Check c;
  std::vector<std::pair<std::string, Graph>> cubic{
      {"K4", complete_graph(4)},   {"K33", k33()},
      {"prism3", prism(3)},        {"cube", cube()},
      {"prism5", prism(5)},        {"petersen", petersen()},
      {"2xK4", disjoint_union(complete_graph(4), complete_graph(4))},
  };
  for (auto& [name, g] : cubic) {
    bool ham = oracle::ham_cycle(g);
    MatchProblemFile pf = encode_hamiltonian(g);
    auto r = letrec_match(pf, MatchOptions{.collecting = false, .budget = 4000000});
    c.expect(r.status != MatchStatus::Overflow, name + ": encoder overflow");
    c.expect((r.status == MatchStatus::Sat) == ham, name + ": solvability mismatch");
  }
  c.expect(!oracle::ham_cycle(petersen()), "petersen must be non-hamiltonian");

  Graph two_triangles = disjoint_union(cycle_graph(3), cycle_graph(3));
  std::vector<std::tuple<std::string, Graph, Graph>> iso{
      {"C6 vs 2xC3", cycle_graph(6), two_triangles},
      {"C5 vs C5", cycle_graph(5), relabel(cycle_graph(5), 7)},
      {"K4 vs K4", complete_graph(4), relabel(complete_graph(4), 9)},
      {"K33 vs prism3", k33(), prism(3)},
      {"cube vs cube", cube(), relabel(cube(), 11)},
      {"C8 vs 2xC4", cycle_graph(8), disjoint_union(cycle_graph(4), cycle_graph(4))},
  };
  for (auto& [name, g1, g2] : iso) {
    bool is_iso = oracle::graph_iso(g1, g2);
    MatchProblemFile pf = encode_graph_iso(g1, g2);
    c.expect(is_garbage_free(pf.equations[0].second), name + ": target not garbage-free");
    auto r = letrec_match(pf, MatchOptions{.collecting = false, .budget = 4000000});
    c.expect(r.status != MatchStatus::Overflow, name + ": encoder overflow");
    c.expect((r.status == MatchStatus::Sat) == is_iso, name + ": solvability mismatch");
  }
  return c;
}

// 8: the guided atom-variable strategy on solvable corpora.
Check criterion8() {
  Check c;
  Gen g(808);
  std::vector<Atom> pool{A("a"), A("b"), A("c")};

  auto abstract_atom = [&](const Expr& e, Atom at, AtomVar av) {
    struct Repl {
      Atom at;
      AtomVar av;
      Expr run(const Expr& x) {
        switch (x.kind()) {
          case ExprKind::WLeaf:
            if (w_is_atom(as_wleaf(x).w) && w_as_atom(as_wleaf(x).w) == at)
              return mk_avar_leaf(av);
            return x;
          case ExprKind::Susp:
            return x;
          case ExprKind::Lam: {
            W b = as_lam(x).binder;
            if (w_is_atom(b) && w_as_atom(b) == at) b = w_avar(av);
            return mk_lam(b, run(as_lam(x).body));
          }
          case ExprKind::Fun: {
            std::vector<Expr> args;
            for (const Expr& a : as_fun(x).args) args.push_back(run(a));
            return mk_fun(as_fun(x).sym, std::move(args));
          }
          case ExprKind::Letrec: {
            std::vector<EnvItem> env;
            for (const EnvItem& item : as_letrec(x).env) {
              const auto& bd = std::get<Binding>(item);
              W b = bd.binder;
              if (w_is_atom(b) && w_as_atom(b) == at) b = w_avar(av);
              env.push_back(Binding{b, run(bd.rhs)});
            }
            return mk_letrec(std::move(env), run(as_letrec(x).body));
          }
        }
        return x;
      }
    } repl{at, av};
    return repl.run(e);
  };

  size_t solvable_runs = 0;
  for (int trial = 0; trial < 60; ++trial) {
    Signature sig;
    Expr t = nomlet::test::random_ground(g, pool, sig, 3, 2);
    int counter = 0;
    Expr lhs = abstract_vars(g, t, counter, 0.15);
    AtomSet atoms = all_atoms(lhs);
    std::vector<Atom> av(atoms.begin(), atoms.end());
    size_t k = std::min<size_t>(av.size(), 1 + g.pick(2));
    Expr lhs_av = lhs;
    for (size_t i = 0; i < k; ++i)
      lhs_av = abstract_atom(lhs_av, av[i], mk_atom_var("Q" + std::to_string(i)));
    UnifyProblemFile pf;
    pf.equations.push_back({lhs_av, t});

    AvOptions opts;
    opts.budget = 300000;
    auto r = letrec_unify_av(pf, opts);
    if (r.status == UnifyStatus::Overflow) continue;
    c.expect(r.status == UnifyStatus::Sat,
             "abstraction of a solvable problem must stay solvable");
    c.expect(r.stats.stuck_states == 0, "stuck state on a solvable run");
    c.expect(r.stats.elimab_bound_violations == 0, "fixpoint family above p(S)");
    c.expect(r.stats.measure_violations == 0, "measure increase on an applied rule");
    ++solvable_runs;

    std::set<AtomVar> avars;
    collect_atom_vars(lhs_av, nullptr, avars);
    if (avars.size() <= 2) {
      std::vector<AtomVar> vs(avars.begin(), avars.end());
      AtomSet patoms;
      collect_atoms(lhs_av, nullptr, patoms);
      collect_atoms(t, nullptr, patoms);
      std::vector<Atom> bpool(patoms.begin(), patoms.end());
      AtomSet avoid = patoms;
      for (size_t i = 0; i < vs.size(); ++i) {
        Atom fa = fresh_atom(avoid);
        avoid.insert(fa);
        bpool.push_back(fa);
      }
      std::map<AtomVar, Atom> assign;
      auto rec = [&](auto&& self, size_t i) -> bool {
        if (i == vs.size()) {
          Expr inst = lhs_av;
          for (auto& [a2, b2] : assign) inst = subst_atom_var(inst, a2, b2);
          struct Chk {
            bool ok = true;
            void run(const Expr& x) {
              switch (x.kind()) {
                case ExprKind::Lam:
                  run(as_lam(x).body);
                  return;
                case ExprKind::Fun:
                  for (const Expr& a : as_fun(x).args) run(a);
                  return;
                case ExprKind::Letrec: {
                  AtomSet bs;
                  for (const EnvItem& item : as_letrec(x).env) {
                    const auto& b = std::get<Binding>(item);
                    if (!w_is_atom(b.binder) || !bs.insert(w_as_atom(b.binder)).second)
                      ok = false;
                    run(b.rhs);
                  }
                  run(as_letrec(x).body);
                  return;
                }
                default:
                  return;
              }
            }
          } chk;
          chk.run(inst);
          if (!chk.ok) return false;
          UnifyProblemFile gp;
          gp.equations.push_back({inst, t});
          return letrec_unify(gp, UnifyOptions{.budget = 100000}).status ==
                 UnifyStatus::Sat;
        }
        for (Atom a2 : bpool) {
          assign[vs[i]] = a2;
          if (self(self, i + 1)) return true;
        }
        assign.erase(vs[i]);
        return false;
      };
      bool baseline = rec(rec, 0);
      c.expect(baseline == (r.status == UnifyStatus::Sat),
               "verdict differs from the guess-first baseline");
    }
  }
  c.expect(solvable_runs >= 50, "too few solvable runs");

  UnifyProblemFile hard = problem(
      "(problem (eq (app (letrec ((@A a) (@B a)) @B) @A)"
      "             (app (letrec ((@A a) (@B a)) @B) @B)))");
  auto r = letrec_unify_av(hard);
  c.expect(r.status == UnifyStatus::Unsat, "distinctness example must stay unsat");
  return c;
}

// 9: permutation grammar laws at scale.
Check criterion9() {
  Check c;
  Gen rnd(909);
  std::vector<Atom> pool{A("a"), A("b"), A("c"), A("d"), A("e")};
  PermGrammar g;
  std::vector<NtId> nts{g.empty()};
  for (int i = 0; i < 10000; ++i) {
    NtId nt;
    if (nts.size() < 4 || rnd.coin(0.5)) {
      Atom x = pool[rnd.pick(pool.size())];
      Atom y = pool[rnd.pick(pool.size())];
      nt = g.swap_nt(SwapW{w_atom(x), w_atom(y)});
    } else {
      nt = g.compose(nts[rnd.pick(nts.size())], nts[rnd.pick(nts.size())]);
    }
    nts.push_back(nt);
    if (!compose(g.eval_ground(g.inverse(nt)), g.eval_ground(nt)).is_identity()) {
      c.expect(false, "inverse law violated at nonterminal " + std::to_string(nt));
      break;
    }
  }
  std::vector<Atom> small{A("a"), A("b"), A("c")};
  for (int trial = 0; trial < 200; ++trial) {
    PermGrammar g2;
    size_t len = 1 + rnd.pick(50);
    NtId acc = g2.empty();
    Perm naive;
    for (size_t i = 0; i < len; ++i) {
      Atom x = small[rnd.pick(small.size())];
      Atom y = small[rnd.pick(small.size())];
      acc = g2.compose(g2.swap_nt(SwapW{w_atom(x), w_atom(y)}), acc);
      naive = compose(Perm::swap(x, y), naive);
    }
    if (!(g2.eval_ground(acc) == naive)) {
      c.expect(false, "ground simplification disagrees with naive expansion");
      break;
    }
  }
  return c;
}

// 10: freshness simplification is atomic-or-bottom and matches enumeration.
Check criterion10() {
  Check c;
  Gen g(1010);
  std::vector<Atom> pool{A("a"), A("b"), A("c")};
  Signature sig;
  sig.declare(mk_fun("f"), 2);
  sig.declare(mk_fun("g"), 1);
  sig.declare(mk_fun("c"), 0);
  auto candidates = oracle::enum_ground_exprs(pool, sig, 2, 1);

  size_t bot_seen = 0;
  for (int trial = 0; trial < 400; ++trial) {
    Expr base = nomlet::test::random_ground(g, pool, sig, 2, 2);
    int counter = 0;
    Expr t = abstract_vars(g, base, counter, 0.3);
    Freshness f{w_atom(pool[g.pick(pool.size())]), t};
    auto ctx = simplify({f});
    if (!(ctx.bot || ctx.fully_atomic())) {
      c.expect(false, "simplify returned a non-atomic, non-bottom context");
      break;
    }
    bot_seen += ctx.bot;

    std::set<ExprVar> vs;
    collect_expr_vars(t, vs);
    if (vs.size() > 2 || size_counted(t) > 8) continue;
    std::vector<ExprVar> vars(vs.begin(), vs.end());
    bool sat = false;
    std::map<ExprVar, Expr> rho;
    auto rec = [&](auto&& self, size_t i) -> void {
      if (sat) return;
      if (i == vars.size()) {
        Expr inst = t;
        for (auto& [x, v] : rho) inst = subst_var(inst, x, v);
        if (!oracle::free_atoms_naive(inst).count(w_as_atom(f.subject))) sat = true;
        return;
      }
      for (const Expr& cand : candidates) {
        rho[vars[i]] = cand;
        self(self, i + 1);
      }
      rho.erase(vars[i]);
    };
    rec(rec, 0);
    if (ctx.bot == sat) {
      c.expect(false, "bottom verdict disagrees with enumeration on " + print_expr(t));
      break;
    }
  }
  c.expect(bot_seen > 5, "corpus produced too few bottoms");
  return c;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Check()> run;
  double limit_s;  // 0 = no limit
};

}  // namespace

int main() {
  auto corpus = random_corpus(200, 303);

  std::vector<Criterion> criteria{
      {1, "paper examples reproduce", criterion1, 1.0},
      {2, "fixpoint blow-up with and without ElimFP", criterion2, 30.0},
      {3, "rule-application bound O(S^3 log S)", [&] { return criterion3(corpus); }, 0},
      {4, "soundness of emitted unifiers and matches", [&] { return criterion4(corpus); }, 0},
      {5, "completeness against the oracle", criterion5, 600.0},
      {6, "garbage-free fixpoint property", criterion6, 0},
      {7, "hardness encoders agree with graph oracles", criterion7, 0},
      {8, "guided atom-variable strategy", criterion8, 0},
      {9, "permutation grammar laws", criterion9, 0},
      {10, "freshness simplification", criterion10, 0},
  };

  bool all_ok = true;
  for (auto& cr : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Check c = cr.run();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool time_ok = cr.limit_s <= 0 || secs <= cr.limit_s;
    bool ok = c.ok && time_ok;
    all_ok &= ok;
    std::printf("criterion %2d %-45s %s (%.2fs)%s%s\n", cr.id, cr.name,
                ok ? "PASS" : "FAIL", secs, c.ok ? "" : (" - " + c.detail.str()).c_str(),
                time_ok ? "" : " - time limit exceeded");
    std::fflush(stdout);
  }
  return all_ok ? 0 : 1;
}
