#include "doctest.h"
#include "nomlet/oracle.hpp"
#include "nomlet/permgroup.hpp"
#include "testutil.hpp"

using namespace nomlet;
using nomlet::test::A;
using nomlet::test::Gen;

TEST_CASE("membership basics") {
  CHECK(group_member(Perm{}, {}));
  CHECK(group_member(Perm{}, {Perm::swap(A("a"), A("b"))}));
  // <(a b),(b c)> = S3 contains (a c)
  CHECK(group_member(Perm::swap(A("a"), A("c")),
                     {Perm::swap(A("a"), A("b")), Perm::swap(A("b"), A("c"))}));
  // <(a b)(c d)> has order 2
  Perm abcd = compose(Perm::swap(A("a"), A("b")), Perm::swap(A("c"), A("d")));
  CHECK(!group_member(Perm::swap(A("a"), A("b")), {abcd}));
  CHECK(group_member(abcd, {abcd}));
}

TEST_CASE("membership agrees with the naive closure") {
  Gen g(41);
  std::vector<Atom> pool{A("a"), A("b"), A("c"), A("d"), A("e"), A("f")};
  for (int trial = 0; trial < 300; ++trial) {
    size_t ngens = 1 + g.pick(4);
    std::vector<Perm> gens;
    for (size_t i = 0; i < ngens; ++i)
      gens.push_back(nomlet::test::random_perm(g, pool, 1 + g.pick(3)));
    Perm probe = nomlet::test::random_perm(g, pool, 1 + g.pick(3));
    CHECK(group_member(probe, gens) == oracle::naive_group_member(probe, gens));
  }
}

TEST_CASE("reduce removes duplicates and identities") {
  Perm ab = Perm::swap(A("a"), A("b"));
  auto r1 = reduce_generators({ab, ab});
  REQUIRE(r1.size() == 1);
  CHECK(r1[0] == ab);
  CHECK(reduce_generators({Perm{}}).empty());
}

TEST_CASE("reduce drops generators implied by the others") {
  Perm ab = Perm::swap(A("a"), A("b"));
  Perm bc = Perm::swap(A("b"), A("c"));
  Perm ac = Perm::swap(A("a"), A("c"));
  auto r = reduce_generators({ab, bc, ac});
  CHECK(r.size() == 2);
}

TEST_CASE("reduce preserves the generated group and respects the size bound") {
  Gen g(43);
  std::vector<Atom> pool{A("a"), A("b"), A("c"), A("d"), A("e")};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Perm> gens;
    size_t n = 1 + g.pick(5);
    for (size_t i = 0; i < n; ++i)
      gens.push_back(nomlet::test::random_perm(g, pool, 1 + g.pick(3)));
    auto red = reduce_generators(gens);
    for (const Perm& p : gens) CHECK(group_member(p, red));
    for (const Perm& p : red) CHECK(group_member(p, gens));
    // carrier * log2(carrier) + 1 for a carrier of at most 5 atoms
    CHECK(red.size() <= static_cast<size_t>(5 * std::log2(5.0) + 1));
  }
}
