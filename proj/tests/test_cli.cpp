#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "doctest.h"
#include "nomlet/sexpr.hpp"

namespace {

struct RunResult {
  int code;
  std::string out;
};

RunResult run(const std::string& args) {
  std::string cmd = std::string(NOMLET_CLI_PATH) + " " + args + " 2>/dev/null";
  std::array<char, 4096> buf;
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

std::string write_tmp(const std::string& name, const std::string& content) {
  std::string path = std::string("/tmp/nomlet_cli_") + name;
  std::ofstream f(path);
  f << content;
  return path;
}

}  // namespace

TEST_CASE("unify subcommand: exit codes and records") {
  auto sat = write_tmp("sat.prob", "(problem (eq (lam a ?X) (lam b b)))");
  auto unsat = write_tmp("unsat.prob", "(problem (eq a b))");
  auto bad = write_tmp("bad.prob", "(problem (eq a)");

  RunResult r1 = run("unify " + sat);
  CHECK(r1.code == 0);
  CHECK(r1.out.find("(unifier") != std::string::npos);

  RunResult r2 = run("unify " + unsat);
  CHECK(r2.code == 1);
  CHECK(r2.out.find("(unsat)") != std::string::npos);

  CHECK(run("unify " + bad).code == 2);
  CHECK(run("unify /nonexistent/file").code == 2);
}

TEST_CASE("deterministic byte-identical output") {
  auto f = write_tmp("det.prob",
                     "(problem (eq (letrec ((a (pair a b)) (b (pair a b))) b)"
                     "             (letrec ((b (pair b c)) (c (pair b c))) c)))");
  RunResult a = run("unify " + f + " --mode collecting --stats");
  RunResult b = run("unify " + f + " --mode collecting --stats");
  CHECK(a.code == b.code);
  CHECK(a.out == b.out);
  CHECK(!a.out.empty());
}

TEST_CASE("unify output can be re-parsed") {
  auto f = write_tmp("reparse.prob", "(problem (eq (lam a ?X) (lam b (g b))))");
  RunResult r = run("unify " + f);
  REQUIRE(r.code == 0);
  auto records = nomlet::parse_sexprs(r.out);
  REQUIRE(!records.empty());
  CHECK(records[0].list()[0].token() == "unifier");
}

TEST_CASE("match subcommand") {
  auto f = write_tmp("lbeta.match",
                     "(match (le (app (lam c ?X1) ?X2) (app (lam a a) (lam b b))))");
  RunResult r = run("match " + f);
  CHECK(r.code == 0);
  CHECK(r.out.find("(match-subst") != std::string::npos);

  auto fail = write_tmp("fail.match", "(match (le (lam c c) (lam b a)))");
  CHECK(run("match " + fail).code == 1);
}

TEST_CASE("alphaeq subcommand") {
  auto e1 = write_tmp("e1.lrl", "(lam a a)");
  auto e2 = write_tmp("e2.lrl", "(lam b b)");
  auto e3 = write_tmp("e3.lrl", "(lam b a)");
  CHECK(run("alphaeq " + e1 + " " + e1).code == 0);
  CHECK(run("alphaeq " + e1 + " " + e2).code == 0);
  CHECK(run("alphaeq " + e1 + " " + e3).code == 1);
  auto open = write_tmp("open.lrl", "?X");
  CHECK(run("alphaeq " + e1 + " " + open).code == 2);
}

TEST_CASE("graph encoders emit parseable match problems") {
  auto k4 = write_tmp("k4.edges", "a b\na c\na d\nb c\nb d\nc d\n");
  RunResult gen = run("gen-ham " + k4);
  REQUIRE(gen.code == 0);
  auto prob = write_tmp("k4.match", gen.out);
  RunResult m = run("match " + prob + " --mode decision");
  CHECK(m.code == 0);  // K4 is Hamiltonian

  // the Petersen graph is 3-regular but has no Hamiltonian cycle
  std::string pet;
  for (int i = 0; i < 5; ++i) {
    pet += "o" + std::to_string(i) + " o" + std::to_string((i + 1) % 5) + "\n";
    pet += "i" + std::to_string(i) + " i" + std::to_string((i + 2) % 5) + "\n";
    pet += "o" + std::to_string(i) + " i" + std::to_string(i) + "\n";
  }
  auto pet_edges = write_tmp("petersen.edges", pet);
  RunResult pgen = run("gen-ham " + pet_edges);
  REQUIRE(pgen.code == 0);
  auto pprob = write_tmp("petersen.match", pgen.out);
  CHECK(run("match " + pprob + " --mode decision").code == 1);

  auto c3a = write_tmp("c3a.edges", "x y\ny z\nx z\n");
  auto c3b = write_tmp("c3b.edges", "p q\nq r\np r\n");
  RunResult gi = run("gen-gi " + c3a + " " + c3b);
  REQUIRE(gi.code == 0);
  auto gprob = write_tmp("gi.match", gi.out);
  CHECK(run("match " + gprob + " --mode decision").code == 0);
}

TEST_CASE("envmatch subcommand") {
  auto f = write_tmp("env.match",
                     "(match (le (letrec (%E1) (letrec (%E2) ?X))"
                     "           (letrec ((a (0)) (b (1))) (letrec ((c (t3 a b c))) c))))");
  RunResult r = run("envmatch " + f + " --mode decision");
  CHECK(r.code == 0);
  CHECK(r.out.find("(envs") != std::string::npos);
}

TEST_CASE("unify-av subcommand") {
  auto bad = write_tmp("av1.prob",
                       "(problem (eq (app (letrec ((@A a) (@B a)) @B) @A)"
                       "             (app (letrec ((@A a) (@B a)) @B) @B)))");
  CHECK(run("unify-av " + bad).code == 1);
  auto good = write_tmp("av2.prob",
                        "(problem (eq (app (letrec ((@A a) (@C a)) @C) @A)"
                        "             (app (letrec ((@A a) (@D a)) @D) @B)))");
  CHECK(run("unify-av " + good + " --mode decision").code == 0);
  CHECK(run("unify-av " + good + " --strategy-p quadratic --mode decision").code == 0);
}

TEST_CASE("oracle subcommand and cross-checking") {
  auto f = write_tmp("oracle.prob", "(problem (eq ?X a))");
  RunResult r = run("oracle " + f);
  CHECK(r.code == 0);
  CHECK(r.out.find("(solution") != std::string::npos);

  CHECK(run("unify " + f + " --oracle").code == 0);
  auto f2 = write_tmp("oracle2.prob", "(problem (eq a b))");
  CHECK(run("unify " + f2 + " --oracle").code == 1);
}

TEST_CASE("budget overflow is a distinct exit code") {
  auto f = write_tmp("budget.prob",
                     "(problem (eq (letrec ((a ?A1) (b ?A2) (c ?A3)) ?X)"
                     "             (letrec ((d ?B1) (e ?B2) (f ?B3)) ?Y)))");
  CHECK(run("unify " + f + " --budget 2").code == 3);
}
