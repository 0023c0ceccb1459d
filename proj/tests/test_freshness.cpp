#include <algorithm>

#include "doctest.h"
#include "nomlet/freshness.hpp"
#include "nomlet/oracle.hpp"
#include "testutil.hpp"

using namespace nomlet;
using nomlet::test::A;
using nomlet::test::E;
using nomlet::test::Gen;

namespace {

Freshness F(const std::string& subject, const std::string& target) {
  Signature sig;
  SExpr s = parse_sexpr(subject);
  return Freshness{parse_w(s), parse_expr_text(target, sig)};
}

}  // namespace

TEST_CASE("simplification rules") {
  // a # b with distinct atoms is discharged
  CHECK(simplify({F("a", "b")}).atomic.empty());
  CHECK(!simplify({F("a", "b")}).bot);
  // a # lam a.s is discharged
  CHECK(simplify({F("a", "(lam a (f a a))")}).fully_atomic());
  CHECK(simplify({F("a", "(lam a (f a a))")}).atomic.empty());
  // a # (a b).X becomes b # X  (the inverse of (a b) maps a to b)
  auto ctx = simplify({F("a", "(perm ((a b)) ?X)")});
  REQUIRE(ctx.atomic.size() == 1);
  CHECK(ctx.atomic.begin()->atom == A("b"));
  CHECK(ctx.atomic.begin()->var == mk_expr_var("X"));
  // a # a fails
  CHECK(simplify({F("a", "a")}).bot);
}

TEST_CASE("letrec and application targets decompose") {
  auto ctx = simplify({F("a", "(letrec ((b ?X)) ?Y)")});
  CHECK(ctx.fully_atomic());
  CHECK(ctx.atomic.size() == 2);
  // binder hit discharges the constraint
  CHECK(simplify({F("a", "(letrec ((a ?X)) ?Y)")}).atomic.empty());
  CHECK(simplify({F("a", "(f ?X b a)")}).bot);
}

TEST_CASE("simplify yields atomic-or-bot on every LRLX input") {
  Gen g(5);
  std::vector<Atom> pool{A("a"), A("b"), A("c")};
  Signature sig;
  for (int i = 0; i < 300; ++i) {
    Expr t = nomlet::test::random_ground(g, pool, sig, 2);
    // sprinkle variables: replace some leaves by suspensions
    Freshness f{w_atom(pool[g.pick(pool.size())]), t};
    auto ctx = simplify({f});
    CHECK((ctx.bot || ctx.fully_atomic()));
  }
}

TEST_CASE("bottom coincides with ground-enumeration unsatisfiability") {
  // small instances: <= 3 atoms, <= 2 vars, depth <= 2
  Gen g(31);
  std::vector<Atom> pool{A("a"), A("b"), A("c")};
  Signature sig;
  sig.declare(mk_fun("f"), 2);
  sig.declare(mk_fun("g"), 1);
  sig.declare(mk_fun("c"), 0);
  auto candidates = oracle::enum_ground_exprs(pool, sig, 2, 2);

  auto targets = std::vector<std::string>{
      "a",           "b",           "?X",          "(perm ((a b)) ?X)",
      "(lam a ?X)",  "(lam b ?X)",  "(f ?X a)",    "(g (g b))",
      "(letrec ((a ?X)) ?Y)",       "(letrec ((b a)) ?X)",
  };
  for (const auto& ts : targets) {
    Signature s2 = sig;
    Expr t = parse_expr_text(ts, s2);
    for (Atom a : pool) {
      Freshness f{w_atom(a), t};
      auto ctx = simplify({f});
      // enumerate all substitutions for the variables of t
      std::set<ExprVar> vs;
      collect_expr_vars(t, vs);
      std::vector<ExprVar> vars(vs.begin(), vs.end());
      bool sat = false;
      std::map<ExprVar, Expr> rho;
      auto rec = [&](auto&& self, size_t i) -> void {
        if (sat) return;
        if (i == vars.size()) {
          Expr inst = t;
          for (auto& [x, v] : rho) inst = subst_var(inst, x, v);
          if (!oracle::free_atoms_naive(inst).count(a)) sat = true;
          return;
        }
        for (const Expr& c2 : candidates) {
          rho[vars[i]] = c2;
          self(self, i + 1);
        }
        rho.erase(vars[i]);
      };
      rec(rec, 0);
      CAPTURE(ts);
      CAPTURE(a.name());
      CHECK(ctx.bot == !sat);
    }
  }
}

TEST_CASE("simplification is confluent over application orders") {
  Gen g(37);
  std::vector<Atom> pool{A("a"), A("b"), A("c")};
  Signature sig;
  for (int i = 0; i < 100; ++i) {
    std::vector<Freshness> fs;
    for (int k = 0; k < 4; ++k)
      fs.push_back(Freshness{w_atom(pool[g.pick(pool.size())]),
                             nomlet::test::random_ground(g, pool, sig, 2)});
    auto ctx1 = simplify(fs);
    std::shuffle(fs.begin(), fs.end(), g.rng);
    auto ctx2 = simplify(fs);
    CHECK(ctx1.bot == ctx2.bot);
    if (!ctx1.bot) CHECK(ctx1.atomic == ctx2.atomic);
  }
}

TEST_CASE("check_ground") {
  Signature sig;
  std::map<ExprVar, Expr> rho1{{mk_expr_var("X"), parse_expr_text("b", sig)}};
  std::map<ExprVar, Expr> rho2{{mk_expr_var("X"), parse_expr_text("a", sig)}};
  std::map<ExprVar, Expr> rho3{{mk_expr_var("X"), parse_expr_text("(lam a a)", sig)}};
  std::vector<Freshness> c{F("a", "?X")};
  CHECK(check_ground(c, rho1));
  CHECK(!check_ground(c, rho2));
  CHECK(check_ground(c, rho3));
}

TEST_CASE("satisfiability with atom variables") {
  CHECK(av_satisfiable(FreshnessContext{}));
  // A # B as atoms: satisfiable with distinct images
  {
    FreshnessContext ctx;
    add_constraint(ctx, Freshness{w_avar(mk_atom_var("A")), mk_avar_leaf(mk_atom_var("B"))});
    auto w = av_satisfiable(ctx);
    REQUIRE(w.has_value());
    CHECK(!(w->assignment.at(mk_atom_var("A")) == w->assignment.at(mk_atom_var("B"))));
  }
  // A = a forced by equality, together with A # a: unsatisfiable
  {
    FreshnessContext ctx;
    add_equality(ctx, FreshEq{w_avar(mk_atom_var("A")), w_atom(A("a"))});
    add_constraint(ctx, Freshness{w_avar(mk_atom_var("A")), mk_atom_leaf(A("a"))});
    CHECK(!av_satisfiable(ctx).has_value());
  }
  // A # A is immediately bottom
  {
    FreshnessContext ctx;
    add_constraint(ctx, Freshness{w_avar(mk_atom_var("A")), mk_avar_leaf(mk_atom_var("A"))});
    CHECK(ctx.bot);
  }
}
