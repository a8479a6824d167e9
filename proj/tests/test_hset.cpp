#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "hflab/hset.hpp"

using namespace hflab;

namespace {

HSet random_hset(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> width(0, 3);
  if (depth == 0) return HSet::empty_set();
  std::vector<HSet> elems;
  int w = width(rng);
  for (int i = 0; i < w; ++i) elems.push_back(random_hset(rng, depth - 1));
  return HSet::from_elements(std::move(elems));
}

// Reference membership count, ignoring the canonical representation.
bool brute_equal(const HSet& a, const HSet& b) {
  if (a.is_atom() || b.is_atom()) return a == b;
  if (a.card() != b.card()) return false;
  for (const HSet& x : a.elements()) {
    bool found = false;
    for (const HSet& y : b.elements()) found = found || brute_equal(x, y);
    if (!found) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("canonicalization") {
  HSet e = HSet::empty_set();
  CHECK(canon({e, e}) == canon({e}));
  CHECK(canon({}) == e);
  CHECK(canon({nat(1), nat(0)}) == canon({nat(0), nat(1)}));
  // idempotent on its own output
  HSet s = canon({nat(2), nat(0), nat(2)});
  CHECK(canon(std::vector<HSet>(s.elements().begin(), s.elements().end())) == s);
}

TEST_CASE("interned equality matches structural equality") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    HSet a = random_hset(rng, 3);
    HSet b = random_hset(rng, 3);
    CHECK((a == b) == brute_equal(a, b));
  }
}

TEST_CASE("atoms are a disjoint sort") {
  HSet a = atom("left");
  HSet b = atom("right");
  CHECK(a.is_atom());
  CHECK(a != b);
  CHECK(atom("left") == a);
  CHECK(a != HSet::empty_set());
  CHECK(a != singleton(HSet::empty_set()));
  CHECK(atom_name(a) == "left");
  CHECK_FALSE(a.contains(HSet::empty_set()));
}

TEST_CASE("kuratowski pairs") {
  HSet e = HSet::empty_set();
  CHECK(kpair(e, e) == singleton(singleton(e)));
  CHECK(kpair(nat(0), nat(1)) == doubleton(singleton(nat(0)), doubleton(nat(0), nat(1))));

  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    HSet x = random_hset(rng, 2);
    HSet y = random_hset(rng, 2);
    auto parts = kpair_parts(kpair(x, y));
    REQUIRE(parts.has_value());
    CHECK(parts->first == x);
    CHECK(parts->second == y);
  }
  CHECK_FALSE(kpair_parts(nat(3)).has_value());
  CHECK_FALSE(kpair_parts(atom("left")).has_value());
}

TEST_CASE("kpair injectivity on random samples") {
  std::mt19937_64 rng(13);
  std::vector<std::pair<HSet, HSet>> inputs;
  std::vector<HSet> codes;
  for (int i = 0; i < 60; ++i) {
    HSet x = random_hset(rng, 2);
    HSet y = random_hset(rng, 2);
    inputs.emplace_back(x, y);
    codes.push_back(kpair(x, y));
  }
  for (std::size_t i = 0; i < codes.size(); ++i)
    for (std::size_t j = 0; j < codes.size(); ++j)
      if (codes[i] == codes[j]) {
        CHECK(inputs[i].first == inputs[j].first);
        CHECK(inputs[i].second == inputs[j].second);
      }
}

TEST_CASE("cartesian product") {
  HSet e = HSet::empty_set();
  CHECK(cart(e, nat(4)) == e);
  CHECK(cart(singleton(nat(0)), nat(2)) ==
        canon({kpair(nat(0), nat(0)), kpair(nat(0), nat(1))}));
  HSet m = nat(3);
  HSet n = nat(4);
  CHECK(cart(m, n).card() == 12);
  CHECK_THROWS_AS(cart(atom("left"), e), ValidationError);
}

TEST_CASE("classifier predicates") {
  CHECK(is_nat(HSet::empty_set()));
  CHECK_FALSE(is_nat(singleton(singleton(HSet::empty_set()))));  // {{0}} is not transitive
  for (std::size_t n = 0; n <= 8; ++n) {
    CHECK(is_nat(nat(n)));
    CHECK(is_ord(nat(n)));
    CHECK(is_transitive(nat(n)));
    CHECK(is_succ(nat(n)) == (n > 0));
  }
  CHECK_FALSE(is_nat(atom("left")));
  CHECK_FALSE(is_ord(atom("left")));
  CHECK_FALSE(is_succ(atom("left")));
  CHECK_FALSE(is_transitive(atom("left")));
  // {1} is not transitive, hence not an ordinal
  CHECK_FALSE(is_ord(singleton(nat(1))));
  // {0, {1}} is not linearly ordered by membership once {1} joins
  HSet odd = canon({nat(0), singleton(nat(1))});
  CHECK_FALSE(is_nat(odd));
}

TEST_CASE("nat round trip") {
  CHECK(nat(0) == HSet::empty_set());
  CHECK(nat(2) == canon({HSet::empty_set(), singleton(HSet::empty_set())}));
  for (std::size_t n = 0; n <= 16; ++n) {
    auto back = as_nat(nat(n));
    REQUIRE(back.has_value());
    CHECK(*back == n);
  }
  CHECK_FALSE(as_nat(singleton(nat(1))).has_value());
  CHECK_FALSE(as_nat(atom("left")).has_value());
}

TEST_CASE("natural number laws") {
  const std::size_t cap = 8;
  // (i) membership implies proper subset + initial segment
  for (std::size_t x = 0; x <= cap; ++x)
    for (std::size_t y = 0; y <= cap; ++y) {
      HSet hx = nat(x);
      HSet hy = nat(y);
      if (hy.contains(hx)) {
        CHECK(is_subset(hx, hy));
        CHECK(hx != hy);
        // initial segment: any member of y that is a member of a member of x is in x
        for (const HSet& a : hy.elements())
          for (const HSet& b : hx.elements())
            if (b.contains(a)) CHECK(hx.contains(a));
      }
    }
  // (ii) no injection from y into a proper subset x, exhaustively for y <= 6
  for (std::size_t x = 0; x <= 6; ++x)
    for (std::size_t y = x + 1; y <= 6; ++y) {
      // count injections by backtracking over images
      std::vector<int> used(x, 0);
      std::size_t found = 0;
      auto rec = [&](auto&& self, std::size_t next) -> void {
        if (next == y) {
          ++found;
          return;
        }
        for (std::size_t img = 0; img < x; ++img)
          if (!used[img]) {
            used[img] = 1;
            self(self, next + 1);
            used[img] = 0;
          }
      };
      rec(rec, 0);
      CHECK(found == 0);
    }
  // (iii) trichotomy
  for (std::size_t x = 0; x <= cap; ++x)
    for (std::size_t y = 0; y <= cap; ++y) {
      HSet hx = nat(x), hy = nat(y);
      int holds = (hy.contains(hx) ? 1 : 0) + (hx.contains(hy) ? 1 : 0) + (hx == hy ? 1 : 0);
      CHECK(holds == 1);
    }
  // (iv) the predecessor is the greatest member
  for (std::size_t x = 1; x <= cap; ++x) {
    HSet hx = nat(x);
    HSet y = nat(x - 1);
    CHECK(hx == set_insert(y, y));
    for (const HSet& m : hx.elements())
      if (m != y) CHECK(y.contains(m));
  }
}

TEST_CASE("tuple spaces") {
  HSet a = atom("slot_value");
  TupleSpace one(1, singleton(a));
  REQUIRE(one.elements().size() == 1);
  CHECK(one.read(one.elements()[0], 0) == a);

  TupleSpace two(2, nat(2));
  CHECK(two.elements().size() == 4);

  TupleSpace zero(0, nat(3));
  REQUIRE(zero.elements().size() == 1);
  CHECK(zero.elements()[0] == HSet::empty_set());

  // slot replacement touches only the named slot
  TupleSpace three(3, nat(3));
  HSet t = three.encode(std::vector<HSet>{nat(0), nat(1), nat(2)});
  HSet u = three.replace(t, 1, nat(0));
  CHECK(three.read(u, 0) == nat(0));
  CHECK(three.read(u, 1) == nat(0));
  CHECK(three.read(u, 2) == nat(2));
  CHECK(three.contains(u));

  // empty domain, positive arity: no tuples
  TupleSpace none(2, HSet::empty_set());
  CHECK(none.elements().empty());
}

TEST_CASE("set literal round trip") {
  CHECK(parse_hset("{}") == HSet::empty_set());
  CHECK(parse_hset(" { {} , {{}} } ") == nat(2));
  CHECK(parse_hset("n:3") == nat(3));
  CHECK(parse_hset("#point") == atom("point"));
  CHECK(parse_hset("{#a.0,#a.1}") == doubleton(atom("a.0"), atom("a.1")));

  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    HSet x = random_hset(rng, 3);
    CHECK(parse_hset(to_string(x)) == x);
    CHECK(parse_hset(to_string(x, PrintOptions{false})) == x);
  }
  CHECK_THROWS_AS(parse_hset("{,}"), ValidationError);
  CHECK_THROWS_AS(parse_hset("{} junk"), ValidationError);
  CHECK_THROWS_AS(parse_hset("{n:}"), ValidationError);
}

TEST_CASE("ordering is total and stable") {
  std::mt19937_64 rng(19);
  std::vector<HSet> xs;
  for (int i = 0; i < 50; ++i) xs.push_back(random_hset(rng, 3));
  xs.push_back(atom("left"));
  xs.push_back(atom("right"));
  std::sort(xs.begin(), xs.end(), HSetLess{});
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    CHECK(HSet::compare(xs[i], xs[i + 1]) <= 0);
    CHECK(HSet::compare(xs[i], xs[i]) == 0);
  }
  // naturals sort in numeric order
  for (std::size_t n = 0; n + 1 <= 8; ++n) CHECK(nat(n) < nat(n + 1));
}

TEST_CASE("powerset and closure helpers") {
  CHECK(powerset(nat(2)).card() == 4);
  CHECK(powerset(HSet::empty_set()) == singleton(HSet::empty_set()));
  auto closure = hereditary_closure(nat(3));
  CHECK(closure.size() == 4);  // 3, 2, 1, 0
  CHECK(union_all(doubleton(nat(2), singleton(nat(4)))) ==
        canon({nat(0), nat(1), nat(4)}));
  CHECK(set_difference(nat(3), nat(2)) == singleton(nat(2)));
  CHECK(set_intersection(nat(3), singleton(nat(1))) == singleton(nat(1)));
}
