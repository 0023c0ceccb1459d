#include "doctest.h"
#include "nomlet/oracle.hpp"
#include "nomlet/unify.hpp"
#include "testutil.hpp"

using namespace nomlet;
using nomlet::test::A;
using nomlet::test::E;
using nomlet::test::Gen;
using nomlet::test::problem;
using nomlet::test::verify_unifier;

TEST_CASE("flatten bounds equation depth at 1") {
  FreshVars fresh(1);
  Signature sig;
  std::vector<Equation> eqs{
      {parse_expr_text("(f (g a))", sig), parse_expr_text("?X", sig)}};
  auto flat = flatten(eqs, fresh);
  REQUIRE(flat.size() == 2);
  // (f ?_F1) = ?X and ?_F1 = (g a), up to orientation
  CHECK(equal(flat[0].lhs, parse_expr_text("?X", sig)));
  CHECK(equal(flat[0].rhs, parse_expr_text("(f ?_F1)", sig)));
  CHECK(equal(flat[1].lhs, parse_expr_text("?_F1", sig)));
  CHECK(equal(flat[1].rhs, parse_expr_text("(g a)", sig)));
}

TEST_CASE("flatten keeps already-flat equations") {
  FreshVars fresh(1);
  Signature sig;
  std::vector<Equation> eqs{{parse_expr_text("a", sig), parse_expr_text("?X", sig)}};
  auto flat = flatten(eqs, fresh);
  REQUIRE(flat.size() == 1);
  CHECK(equal(flat[0].lhs, parse_expr_text("?X", sig)));
  CHECK(equal(flat[0].rhs, parse_expr_text("a", sig)));
}

TEST_CASE("flatten a lambda") {
  FreshVars fresh(1);
  Signature sig;
  std::vector<Equation> eqs{
      {parse_expr_text("(lam a (g a))", sig), parse_expr_text("?X", sig)}};
  auto flat = flatten(eqs, fresh);
  REQUIRE(flat.size() == 2);
  CHECK(equal(flat[0].rhs, parse_expr_text("(lam a ?_F1)", sig)));
  CHECK(equal(flat[1].rhs, parse_expr_text("(g a)", sig)));
}

TEST_CASE("trivial problems") {
  auto r1 = letrec_unify(problem("(problem (eq ?X ?X))"));
  CHECK(r1.status == UnifyStatus::Sat);
  REQUIRE(r1.unifiers.size() == 1);
  CHECK(r1.unifiers[0].theta.empty());
  CHECK(r1.unifiers[0].fixpoints.empty());
  CHECK(r1.unifiers[0].nabla.atomic.empty());

  CHECK(letrec_unify(problem("(problem (eq a b))")).status == UnifyStatus::Unsat);
  CHECK(letrec_unify(problem("(problem (eq a a))")).status == UnifyStatus::Sat);
}

TEST_CASE("occurs cycle fails") {
  auto r = letrec_unify(problem("(problem (eq ?X (f ?Y)) (eq ?Y (g ?X)))"));
  CHECK(r.status == UnifyStatus::Unsat);
  UnifyOptions opts;
  FreshVars fresh(1);
  UnifState s0 = initial_state(problem("(problem (eq ?X (f ?Y)) (eq ?Y (g ?X)))"), fresh, opts);
  StepResult sr = step(s0, opts);
  CHECK(sr.kind == StepResult::Kind::Fail);
  CHECK(sr.fail_reason == "Cycle");
}

TEST_CASE("clash on distinct tops") {
  CHECK(letrec_unify(problem("(problem (eq (f a a) (g a)))")).status == UnifyStatus::Unsat);
  CHECK(letrec_unify(problem("(problem (eq (lam a a) (f a a)))")).status ==
        UnifyStatus::Unsat);
  CHECK(letrec_unify(problem("(problem (eq (letrec ((a b)) a) (letrec ((a b) (c b)) a)))"))
            .status == UnifyStatus::Unsat);
}

TEST_CASE("freshness failure rules") {
  // a # X with X = a fails
  CHECK(letrec_unify(problem("(problem (eq ?X a) (fresh a ?X))")).status ==
        UnifyStatus::Unsat);
  CHECK(letrec_unify(problem("(problem (eq ?X b) (fresh a ?X))")).status ==
        UnifyStatus::Sat);
}

TEST_CASE("lambda decomposition with renaming") {
  auto r = letrec_unify(problem("(problem (eq (lam a ?X) (lam b b)))"));
  REQUIRE(r.status == UnifyStatus::Sat);
  // X -> (a b).b = a
  Expr img = expand_theta(r.unifiers[0].theta, mk_var(mk_expr_var("X")));
  CHECK(equal(img, E("a")));
}

// The worked letrec example: identity pairing forces pi = {b->a, c->b, a->c}
// and every residual equation is trivial.
TEST_CASE("letrec decomposition example") {
  const char* text =
      "(problem (eq (letrec ((a (pair a b)) (b (pair a b))) b)"
      "             (letrec ((b (pair b c)) (c (pair b c))) c)))";
  UnifyProblemFile pf = problem(text);
  auto r = letrec_unify(pf, UnifyOptions{.collecting = true});
  CHECK(r.status == UnifyStatus::Sat);
  for (const Unifier& u : r.unifiers) CHECK(verify_unifier(pf, u));

  // inspect the branch structure via the step API (after flattening the
  // letrec bodies are fresh variables, so step on the original equation)
  FreshVars fresh(1);
  UnifyOptions opts;
  UnifState s0 = initial_state(pf, fresh, opts);
  // run until the letrec pair is decomposed
  StepResult sr = step(s0, opts);
  while (sr.kind == StepResult::Kind::Next) sr = step(sr.next, opts);
  REQUIRE(sr.kind == StepResult::Kind::Branches);
  REQUIRE(sr.branches.size() == 2);  // two pairings of a 2-binding letrec
  // identity pairing: pi maps b->a, c->b, a->c
  const StepBranch& id_branch = sr.branches[0];
  CHECK(id_branch.rho == std::vector<size_t>{0, 1});
  CHECK(id_branch.pi.apply(A("b")) == A("a"));
  CHECK(id_branch.pi.apply(A("c")) == A("b"));
  CHECK(id_branch.pi.apply(A("a")) == A("c"));
}

TEST_CASE("fixpoint equations survive to the output") {
  // X = (a b).X is satisfiable with FIX left in place
  UnifyProblemFile pf = problem("(problem (eq ?X (perm ((a b)) ?X)))");
  auto r = letrec_unify(pf, UnifyOptions{.collecting = true});
  REQUIRE(r.status == UnifyStatus::Sat);
  REQUIRE(r.unifiers.size() == 1);
  CHECK(r.unifiers[0].fixpoints.size() == 1);
  CHECK(verify_unifier(pf, r.unifiers[0]));
  // a ground witness exists: X -> letrec c.a; d.b in (true)
  Expr witness = E("(letrec ((c a) (d b)) (true))");
  CHECK(alpha_eq(apply_perm(Perm::swap(A("a"), A("b")), witness), witness));
}

TEST_CASE("garbage-free mode turns fixpoints into freshness constraints") {
  UnifyProblemFile pf = problem("(problem (eq ?X (perm ((a b)) ?X)))");
  auto r = letrec_unify(pf, UnifyOptions{.collecting = true, .garbage_free = true});
  REQUIRE(r.status == UnifyStatus::Sat);
  REQUIRE(r.unifiers.size() == 1);
  CHECK(r.unifiers[0].fixpoints.empty());
  AtomicFreshness fa{A("a"), mk_expr_var("X")};
  AtomicFreshness fb{A("b"), mk_expr_var("X")};
  CHECK(r.unifiers[0].nabla.atomic.count(fa));
  CHECK(r.unifiers[0].nabla.atomic.count(fb));
}

TEST_CASE("identity fixpoint adds no constraints in garbage-free mode") {
  UnifyProblemFile pf = problem("(problem (eq ?X ?X))");
  auto r = letrec_unify(pf, UnifyOptions{.collecting = true, .garbage_free = true});
  REQUIRE(r.status == UnifyStatus::Sat);
  CHECK(r.unifiers[0].nabla.atomic.empty());
}

TEST_CASE("garbage-free and standard mode agree on lambda problems") {
  // unify (lam c ?X) = (lam d ?X): solvable, with c # X style constraints
  UnifyProblemFile pf = problem("(problem (eq (lam c ?X) (lam d ?X)))");
  auto std_r = letrec_unify(pf, UnifyOptions{.collecting = true});
  auto gf_r = letrec_unify(pf, UnifyOptions{.collecting = true, .garbage_free = true});
  CHECK(std_r.status == UnifyStatus::Sat);
  CHECK(gf_r.status == UnifyStatus::Sat);
  REQUIRE(gf_r.unifiers.size() == 1);
  CHECK(gf_r.unifiers[0].fixpoints.empty());
  CHECK(!gf_r.unifiers[0].nabla.atomic.empty());
}

TEST_CASE("measure decreases along every step") {
  Gen g(53);
  std::vector<Atom> pool{A("a"), A("b"), A("c")};
  for (int i = 0; i < 60; ++i) {
    Signature sig;
    UnifyProblemFile pf;
    Expr l = nomlet::test::random_ground(g, pool, sig, 3, 2);
    Expr r = nomlet::test::random_ground(g, pool, sig, 3, 2);
    // randomly abstract a couple of subtrees into variables
    pf.equations.push_back({l, r});
    auto res = letrec_unify(pf, UnifyOptions{.collecting = true, .budget = 20000});
    CHECK(res.stats.measure_violations == 0);
  }
}

TEST_CASE("solutions verify against the problem (random ground-vs-pattern corpus)") {
  Gen g(59);
  std::vector<Atom> pool{A("a"), A("b"), A("c")};
  size_t sat_count = 0;
  for (int i = 0; i < 80; ++i) {
    Signature sig;
    Expr t = nomlet::test::random_ground(g, pool, sig, 3, 2);
    // a pattern: rename t and abstract random subtrees into variables
    Expr pat = apply_perm(nomlet::test::random_perm(g, pool, 1), t);
    UnifyProblemFile pf;
    pf.equations.push_back({pat, t});
    auto res = letrec_unify(pf, UnifyOptions{.collecting = true, .budget = 50000});
    if (res.status == UnifyStatus::Sat) {
      ++sat_count;
      for (const Unifier& u : res.unifiers) {
        CAPTURE(print_expr(pat));
        CAPTURE(print_expr(t));
        CHECK(verify_unifier(pf, u));
      }
    }
  }
  CHECK(sat_count > 20);
}

TEST_CASE("garbage-free and standard mode agree on garbage-free instances") {
  // patterns abstracted from garbage-free ground terms: every solution is
  // garbage-free, so the two fixpoint rule sets must agree on solvability
  Gen g(71);
  std::vector<Atom> pool{A("a"), A("b"), A("c")};
  size_t sat = 0;
  for (int i = 0; i < 40; ++i) {
    Signature sig;
    Expr t = nomlet::test::random_garbage_free(g, pool, sig, 3);
    UnifyProblemFile pf;
    Expr pat = apply_perm(nomlet::test::random_perm(g, pool, 1), t);
    pf.equations.push_back({pat, t});
    auto std_r = letrec_unify(pf, UnifyOptions{.budget = 50000});
    auto gf_r = letrec_unify(pf, UnifyOptions{.garbage_free = true, .budget = 50000});
    CAPTURE(print_expr(pat));
    CHECK((std_r.status == UnifyStatus::Sat) == (gf_r.status == UnifyStatus::Sat));
    sat += std_r.status == UnifyStatus::Sat;
  }
  CHECK(sat > 5);
}

TEST_CASE("ElimFP keeps fixpoint families reduced") {
  // three fixpoint equations whose permutations are group-redundant
  UnifyProblemFile pf = problem(
      "(problem (eq ?X (perm ((a b)) ?X))"
      "         (eq ?X (perm ((b c)) ?X))"
      "         (eq ?X (perm ((a b) (b c)) ?X)))");
  auto r = letrec_unify(pf, UnifyOptions{.collecting = true});
  REQUIRE(r.status == UnifyStatus::Sat);
  CHECK(r.unifiers[0].fixpoints.size() == 2);
  CHECK(r.stats.rule_counts["(ElimFP)"] >= 1);

  auto r2 = letrec_unify(pf, UnifyOptions{.collecting = true, .elim_fp = false});
  REQUIRE(r2.status == UnifyStatus::Sat);
  CHECK(r2.unifiers[0].fixpoints.size() == 3);
}
