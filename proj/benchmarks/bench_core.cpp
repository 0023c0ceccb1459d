#include <benchmark/benchmark.h>

#include <random>

#include "nomlet/alpha.hpp"
#include "nomlet/grammar.hpp"
#include "nomlet/match.hpp"
#include "nomlet/permgroup.hpp"
#include "nomlet/unify.hpp"

using namespace nomlet;

namespace {

std::vector<Atom> atom_pool(size_t n) {
  std::vector<Atom> pool;
  AtomSet avoid;
  for (size_t i = 0; i < n; ++i) {
    Atom a = fresh_atom(avoid);
    avoid.insert(a);
    pool.push_back(a);
  }
  return pool;
}

Expr chain_letrec(const std::vector<Atom>& pool, size_t n, Signature& sig) {
  // letrec a1.(f a2); ...; an.(f a1) in a1 - garbage-free by construction
  FunSym f = mk_fun("f");
  sig.declare(f, 1);
  std::vector<EnvItem> env;
  for (size_t i = 0; i < n; ++i)
    env.push_back(Binding{w_atom(pool[i]), mk_fun(f, {mk_atom_leaf(pool[(i + 1) % n])})});
  return mk_letrec(std::move(env), mk_atom_leaf(pool[0]));
}

void BM_AlphaEqLetrec(benchmark::State& state) {
  size_t n = static_cast<size_t>(state.range(0));
  auto pool = atom_pool(n + 2);
  Signature sig;
  Expr e1 = chain_letrec(pool, n, sig);
  // renamed copy
  Perm rot;
  for (size_t i = 0; i + 1 < n; ++i) rot = compose(Perm::swap(pool[i], pool[i + 1]), rot);
  Expr e2 = apply_perm(rot, e1);
  for (auto _ : state) benchmark::DoNotOptimize(alpha_eq(e1, e2));
}
BENCHMARK(BM_AlphaEqLetrec)->Arg(4)->Arg(6)->Arg(8);

void BM_UnifyFixpointFamily(benchmark::State& state) {
  // the exponential family at n = 5, with redundancy elimination on/off
  bool elim = state.range(0) != 0;
  const size_t n = 5;
  auto pool = atom_pool(2 * n);
  std::mt19937 rng(42);
  auto rp = [&](int k) {
    Perm p;
    std::uniform_int_distribution<size_t> d(0, pool.size() - 1);
    for (int i = 0; i < k; ++i) p = compose(Perm::swap(pool[d(rng)], pool[d(rng)]), p);
    return p;
  };
  UnifyProblemFile pf;
  std::vector<ExprVar> xs;
  for (size_t i = 0; i <= n; ++i) xs.push_back(mk_expr_var("X" + std::to_string(i)));
  FunSym f = mk_fun("f");
  Perm pi = rp(4);
  pf.equations.push_back({mk_var(xs[n]), mk_susp(px_ground(pi), xs[n])});
  for (size_t i = n; i >= 2; --i)
    pf.equations.push_back({mk_var(xs[i]),
                            mk_fun(f, {mk_var(xs[i - 1]), mk_susp(px_ground(rp(3)), xs[i - 1])})});
  for (auto _ : state) {
    auto r = letrec_unify(pf, UnifyOptions{.collecting = true, .elim_fp = elim});
    benchmark::DoNotOptimize(r.unifiers.size());
  }
}
BENCHMARK(BM_UnifyFixpointFamily)->Arg(0)->Arg(1);

void BM_GroupMember(benchmark::State& state) {
  size_t n = static_cast<size_t>(state.range(0));
  auto pool = atom_pool(n);
  std::mt19937 rng(7);
  std::uniform_int_distribution<size_t> d(0, n - 1);
  std::vector<Perm> gens;
  for (int i = 0; i < 6; ++i) {
    Perm p;
    for (int k = 0; k < 4; ++k) p = compose(Perm::swap(pool[d(rng)], pool[d(rng)]), p);
    gens.push_back(p);
  }
  Perm probe;
  for (int k = 0; k < 5; ++k) probe = compose(Perm::swap(pool[d(rng)], pool[d(rng)]), probe);
  for (auto _ : state) benchmark::DoNotOptimize(group_member(probe, gens));
}
BENCHMARK(BM_GroupMember)->Arg(10)->Arg(40)->Arg(120);

void BM_GrammarGroundSimplify(benchmark::State& state) {
  size_t len = static_cast<size_t>(state.range(0));
  auto pool = atom_pool(3);
  std::mt19937 rng(5);
  std::uniform_int_distribution<size_t> d(0, pool.size() - 1);
  for (auto _ : state) {
    PermGrammar g;
    NtId acc = g.empty();
    for (size_t i = 0; i < len; ++i)
      acc = g.compose(g.swap_nt(SwapW{w_atom(pool[d(rng)]), w_atom(pool[d(rng)])}), acc);
    benchmark::DoNotOptimize(g.eval_ground(acc));
  }
}
BENCHMARK(BM_GrammarGroundSimplify)->Arg(50)->Arg(500);

void BM_MatchHamiltonianK4(benchmark::State& state) {
  Graph k4;
  for (int i = 0; i < 4; ++i) k4.names.push_back("v" + std::to_string(i));
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) k4.edges.push_back({i, j});
  MatchProblemFile pf = encode_hamiltonian(k4);
  for (auto _ : state) {
    auto r = letrec_match(pf, MatchOptions{.collecting = false});
    benchmark::DoNotOptimize(r.status);
  }
}
BENCHMARK(BM_MatchHamiltonianK4);

}  // namespace

BENCHMARK_MAIN();
