#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "hflab/formula.hpp"

using namespace hflab;

namespace {

Language lang_ur(HSet pool = HSet::empty_set()) {
  Language l;
  l.pool = std::move(pool);
  l.has_u = true;
  l.has_r = true;
  return l;
}

Formula random_formula(std::mt19937_64& rng, const std::vector<HSet>& pool, int depth) {
  std::uniform_int_distribution<int> var(0, 2);
  auto term = [&]() -> Term {
    if (!pool.empty() && std::uniform_int_distribution<int>(0, 3)(rng) == 0)
      return Term::constant_of(pool[std::uniform_int_distribution<std::size_t>(
          0, pool.size() - 1)(rng)]);
    return Term::variable(static_cast<std::uint32_t>(var(rng)));
  };
  int pick = std::uniform_int_distribution<int>(0, depth > 0 ? 5 : 2)(rng);
  switch (pick) {
    case 0:
      return Formula::eq(term(), term());
    case 1:
      return Formula::pred_u(term());
    case 2:
      return Formula::pred_r(term(), term());
    case 3:
      return Formula::negation(random_formula(rng, pool, depth - 1));
    case 4:
      return Formula::conjunction(random_formula(rng, pool, depth - 1),
                                  random_formula(rng, pool, depth - 1));
    default:
      return Formula::exists(static_cast<std::uint32_t>(var(rng)),
                             random_formula(rng, pool, depth - 1));
  }
}

// Test-side witness clause checker, written straight off the build-from-earlier
// clauses and independent of the library path. No minimality here.
bool clauses_hold(const HSet& x, const std::vector<HSet>& f, const Language& lang) {
  if (f.empty() || f.back() != x) return false;
  auto atomic = [&](const HSet& e) {
    auto outer = kpair_parts(e);
    if (!outer) return false;
    if (outer->first == nat(6)) return lang.has_u && decode_term(outer->second).has_value();
    auto inner = kpair_parts(outer->first);
    if (!inner) return false;
    if (inner->first == nat(2) || inner->first == nat(7)) {
      if (inner->first == nat(7) && !lang.has_r) return false;
      auto t = decode_term(inner->second);
      auto s = decode_term(outer->second);
      auto fine = [&](const Term& u) { return u.is_var() || lang.pool.contains(u.constant); };
      return t && s && fine(*t) && fine(*s);
    }
    return false;
  };
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (atomic(f[k])) continue;
    bool ok = false;
    for (std::size_t j = 0; j < k && !ok; ++j) {
      if (f[k] == kpair(nat(3), f[j])) ok = true;
      for (std::size_t l = 0; l < k && !ok; ++l)
        if (f[k] == kpair(kpair(nat(4), f[j]), f[l])) ok = true;
      // quantifier clause: any natural below a small cap as the bound index
      for (std::size_t m = 0; m <= 8 && !ok; ++m)
        if (f[k] == kpair(kpair(nat(5), nat(m)), f[j])) ok = true;
    }
    if (!ok) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("atomic codes match the fixed numerals") {
  Language l = lang_ur();
  Formula r01 = Formula::pred_r(Term::variable(0), Term::variable(1));
  FormulaCode fc = encode(r01, l);
  CHECK(fc.witness.size() == 1);
  CHECK(fc.code == kpair(kpair(nat(7), kpair(nat(0), nat(0))), kpair(nat(0), nat(1))));

  Formula neg = Formula::negation(Formula::pred_r(Term::variable(0), Term::variable(0)));
  FormulaCode nc = encode(neg, l);
  REQUIRE(nc.witness.size() == 2);
  CHECK(nc.witness[1] == kpair(nat(3), nc.witness[0]));
  CHECK(is_atomic_code(nc.witness[0], l));
}

TEST_CASE("shared subformulas are enumerated once") {
  Language l = lang_ur();
  Formula alpha = Formula::pred_u(Term::variable(0));
  Formula both = Formula::conjunction(alpha, alpha);
  FormulaCode fc = encode(both, l);
  CHECK(fc.witness.size() == 2);  // alpha and the conjunction, not three entries
}

TEST_CASE("constants outside the pool are rejected by name") {
  Language l = lang_ur(nat(2));  // pool {0, 1}
  Formula ok = Formula::eq(Term::constant_of(nat(0)), Term::constant_of(nat(1)));
  CHECK(encode(ok, l).witness.size() == 1);
  Formula bad = Formula::pred_u(Term::constant_of(nat(5)));
  CHECK_THROWS_WITH_AS(encode(bad, l), doctest::Contains("n:5"), ValidationError);
}

TEST_CASE("witness predicate") {
  Language l = lang_ur();
  HSet alpha = formula_code(Formula::pred_u(Term::variable(0)));
  HSet beta = formula_code(Formula::pred_r(Term::variable(0), Term::variable(0)));
  HSet gamma = formula_code(Formula::eq(Term::variable(0), Term::variable(1)));

  CHECK(check_fml(alpha, std::vector<HSet>{alpha}, 1, l));
  // padded with unrelated atoms: the clauses hold but minimality fails
  std::vector<HSet> padded{beta, gamma, alpha};
  CHECK(clauses_hold(alpha, padded, l));
  CHECK_FALSE(check_fml(alpha, padded, 3, l));

  HSet notalpha = kpair(nat(3), alpha);
  CHECK(check_fml(notalpha, std::vector<HSet>{alpha, notalpha}, 2, l));
  // wrong order, wrong length, wrong tail
  CHECK_FALSE(check_fml(notalpha, std::vector<HSet>{notalpha, alpha}, 2, l));
  CHECK_FALSE(check_fml(notalpha, std::vector<HSet>{alpha, notalpha}, 1, l));
  CHECK_FALSE(check_fml(alpha, std::vector<HSet>{alpha, notalpha}, 2, l));
  CHECK_FALSE(check_fml(alpha, std::vector<HSet>{}, 0, l));
  // garbage input is just false
  CHECK_FALSE(check_fml(nat(3), std::vector<HSet>{nat(3)}, 1, l));
}

TEST_CASE("no witness shorter than the subformula count exists") {
  Language l = lang_ur(nat(1));
  std::mt19937_64 rng(23);
  std::vector<HSet> pool{nat(0)};
  int tried = 0;
  while (tried < 40) {
    Formula f = random_formula(rng, pool, 3);
    FormulaCode fc = encode(f, l);
    std::size_t n = fc.witness.size();
    if (n > 6 || n < 2) continue;
    ++tried;
    CHECK(check_fml(fc.code, fc.witness, n, l));
    // entry pool: the subformulas plus junk atoms
    std::vector<HSet> entries = fc.witness;
    entries.push_back(formula_code(Formula::eq(Term::variable(7), Term::variable(7))));
    entries.push_back(formula_code(Formula::pred_u(Term::variable(8))));
    // exhaustive search over all shorter sequences ending at the code
    for (std::size_t m = 1; m < n; ++m) {
      std::vector<std::size_t> idx(m - 1, 0);
      bool carry = false;
      while (!carry) {
        std::vector<HSet> cand;
        for (std::size_t i : idx) cand.push_back(entries[i]);
        cand.push_back(fc.code);
        CHECK_FALSE(clauses_hold(fc.code, cand, l));
        std::size_t i = 0;
        for (;; ++i) {
          if (i == idx.size()) {
            carry = true;
            break;
          }
          if (++idx[i] < entries.size()) break;
          idx[i] = 0;
        }
      }
    }
  }
}

TEST_CASE("free variables") {
  Formula r01 = Formula::pred_r(Term::variable(0), Term::variable(1));
  CHECK(r01.free_vars() == std::set<std::uint32_t>{0, 1});
  CHECK(Formula::exists(0, r01).free_vars() == std::set<std::uint32_t>{1});
  Formula closed = Formula::eq(Term::constant_of(nat(0)), Term::constant_of(nat(1)));
  CHECK(closed.free_vars().empty());
  // rebinding leaves inner occurrences captured once
  Formula nested = Formula::exists(0, Formula::conjunction(r01, Formula::exists(0, r01)));
  CHECK(nested.free_vars() == std::set<std::uint32_t>{1});
}

TEST_CASE("decode inverts encode") {
  Language l = lang_ur(nat(2));
  std::mt19937_64 rng(29);
  std::vector<HSet> pool{nat(0), nat(1)};
  for (int i = 0; i < 300; ++i) {
    Formula f = random_formula(rng, pool, 3);
    FormulaCode fc = encode(f, l);
    auto back = decode(fc.code, l);
    REQUIRE(back.has_value());
    CHECK(*back == f);
    CHECK(formula_code(*back) == fc.code);
  }
  CHECK_FALSE(decode(nat(4), l).has_value());
  CHECK_FALSE(decode(kpair(nat(9), nat(0)), l).has_value());
}

TEST_CASE("parser handles the core grammar") {
  SymbolTable syms;
  syms.declare("a", nat(0));
  syms.declare("b", nat(1));

  CHECK(parse_formula("E v0. U(v0)") ==
        Formula::exists(0, Formula::pred_u(Term::variable(0))));
  CHECK(parse_formula("(R(v0,c:a) & !v0=v1)", syms) ==
        Formula::conjunction(
            Formula::pred_r(Term::variable(0), Term::constant_of(nat(0))),
            Formula::negation(Formula::eq(Term::variable(0), Term::variable(1)))));
  // sugar expands before encoding
  CHECK(parse_formula("A v0. U(v0)") ==
        Formula::negation(Formula::exists(0, Formula::negation(Formula::pred_u(Term::variable(0))))));
  CHECK(parse_formula("(U(v0) | U(v1))") ==
        Formula::disjunction(Formula::pred_u(Term::variable(0)),
                             Formula::pred_u(Term::variable(1))));
  CHECK(parse_formula("(U(v0) -> U(v1))") ==
        Formula::implies(Formula::pred_u(Term::variable(0)),
                         Formula::pred_u(Term::variable(1))));

  CHECK_THROWS_WITH_AS(parse_formula("R(v0 v1)"), doctest::Contains("position"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(parse_formula("c:zap=v0", syms), doctest::Contains("zap"),
                       ValidationError);
  CHECK_THROWS_AS(parse_formula("E v0."), ValidationError);
}

TEST_CASE("text round trip") {
  SymbolTable syms;
  syms.declare("a", nat(0));
  syms.declare("b", nat(1));
  std::vector<HSet> pool{nat(0), nat(1)};
  std::mt19937_64 rng(31);
  for (int i = 0; i < 500; ++i) {
    Formula f = random_formula(rng, pool, 3);
    CHECK(parse_formula(to_text(f, syms), syms) == f);
  }
  // printing normalizes whitespace only
  std::string spaced = "( R( v0 , c:a )   &  ! v0 = v1 )";
  Formula f = parse_formula(spaced, syms);
  CHECK(parse_formula(to_text(f, syms), syms) == f);
}

TEST_CASE("structural fold runs the closure induction") {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 200; ++i) {
    Formula f = random_formula(rng, {}, 3);
    // size predicate via fold equals the built-in count
    auto size = fold_formula<std::size_t>(
        f, [](const Formula&) { return std::size_t{1}; },
        [](const Formula&, std::size_t s) { return s + 1; },
        [](const Formula&, std::size_t a, std::size_t b) { return a + b + 1; },
        [](const Formula&, std::uint32_t, std::size_t s) { return s + 1; });
    CHECK(size == f.node_count());
    // printed text keeps parentheses balanced
    std::string text = to_text(f);
    int depth = 0;
    for (char c : text) {
      if (c == '(') ++depth;
      if (c == ')') --depth;
      CHECK(depth >= 0);
    }
    CHECK(depth == 0);
  }
}

TEST_CASE("shape enumeration stays within its bounds") {
  Language l = lang_r_only();
  EnumOptions opts;
  opts.max_nodes = 4;
  auto rank0 = enum_formulas(l, 0, 1, opts);
  bool has_refl_eq = false, has_loop = false;
  for (const Formula& f : rank0) {
    CHECK(f.quantifier_rank() == 0);
    auto mv = f.max_var_index();
    CHECK((!mv || *mv < 1));
    if (f == Formula::eq(Term::variable(0), Term::variable(0))) has_refl_eq = true;
    if (f == Formula::pred_r(Term::variable(0), Term::variable(0))) has_loop = true;
  }
  CHECK(has_refl_eq);
  CHECK(has_loop);
  CHECK(rank0.size() > 2);  // boolean combinations are present

  // no variables allowed and no constants: no atomic formulas at all
  auto empty = enum_formulas(l, 0, 0, opts);
  CHECK(empty.empty());

  // the count guard aborts runaway enumeration
  EnumOptions tight;
  tight.max_nodes = 9;
  tight.max_count = 50;
  CHECK_THROWS_AS(enum_formulas(lang_ur(), 2, 3, tight), GuardError);
}
