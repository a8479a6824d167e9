#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hflab/hset.hpp"

namespace hflab {

// Logical symbols are identified with fixed naturals.
inline constexpr std::size_t kSymEq = 2;
inline constexpr std::size_t kSymNot = 3;
inline constexpr std::size_t kSymAnd = 4;
inline constexpr std::size_t kSymExists = 5;
inline constexpr std::size_t kSymU = 6;
inline constexpr std::size_t kSymR = 7;

// A term is a variable v_n, coded ⟨0,n⟩, or a constant indexed by an
// arbitrary set a, coded ⟨1,a⟩.
struct Term {
  enum class Kind { Var, Const };
  Kind kind = Kind::Var;
  std::uint32_t var = 0;
  HSet constant;

  static Term variable(std::uint32_t n) {
    Term t;
    t.kind = Kind::Var;
    t.var = n;
    return t;
  }
  static Term constant_of(HSet a) {
    Term t;
    t.kind = Kind::Const;
    t.constant = std::move(a);
    return t;
  }
  bool is_var() const { return kind == Kind::Var; }

  friend bool operator==(const Term& a, const Term& b) {
    if (a.kind != b.kind) return false;
    return a.is_var() ? a.var == b.var : a.constant == b.constant;
  }
};

HSet term_code(const Term& t);
std::optional<Term> decode_term(const HSet& code);

// A language with at most one unary predicate U, one binary predicate R
// and one constant per element of a fixed pool set.
struct Language {
  HSet pool;  // the index set of the constants
  bool has_u = false;
  bool has_r = false;

  bool declares(const Term& t) const {
    return t.is_var() || pool.contains(t.constant);
  }
  friend bool operator==(const Language& a, const Language& b) {
    return a.pool == b.pool && a.has_u == b.has_u && a.has_r == b.has_r;
  }
};

inline Language lang_r_only() {
  Language l;
  l.has_r = true;
  return l;
}

// Immutable formula tree over Eq / U / R atoms, negation, conjunction and a
// single-variable existential. Handles share nodes; copying is cheap.
class Formula {
 public:
  enum class Kind { Eq, U, R, Not, And, Exists };

  static Formula eq(Term a, Term b);
  static Formula pred_u(Term a);
  static Formula pred_r(Term a, Term b);
  static Formula negation(Formula f);
  static Formula conjunction(Formula a, Formula b);
  static Formula exists(std::uint32_t var, Formula body);

  // Derived forms, expanded structurally.
  static Formula disjunction(Formula a, Formula b);
  static Formula implies(Formula a, Formula b);
  static Formula forall(std::uint32_t var, Formula body);

  Kind kind() const;
  const Term& term0() const;  // Eq/U/R
  const Term& term1() const;  // Eq/R
  Formula sub0() const;
  Formula sub1() const;  // And
  std::uint32_t bound_var() const;

  bool is_atomic() const;
  std::set<std::uint32_t> free_vars() const;
  std::optional<std::uint32_t> max_var_index() const;  // free and bound
  std::size_t quantifier_rank() const;
  std::size_t node_count() const;

  bool operator==(const Formula& other) const;  // structural
  bool operator!=(const Formula& other) const { return !(*this == other); }
  static int compare(const Formula& a, const Formula& b);  // total order

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct FormulaLess {
  bool operator()(const Formula& a, const Formula& b) const {
    return Formula::compare(a, b) < 0;
  }
};

// Structural recursion: any property established on the atoms and preserved
// by the three constructors holds everywhere; a fold is that induction made
// executable.
template <class T, class AtomFn, class NotFn, class AndFn, class ExistsFn>
T fold_formula(const Formula& f, AtomFn&& on_atom, NotFn&& on_not, AndFn&& on_and,
               ExistsFn&& on_exists) {
  switch (f.kind()) {
    case Formula::Kind::Eq:
    case Formula::Kind::U:
    case Formula::Kind::R:
      return on_atom(f);
    case Formula::Kind::Not:
      return on_not(f, fold_formula<T>(f.sub0(), on_atom, on_not, on_and, on_exists));
    case Formula::Kind::And:
      return on_and(f, fold_formula<T>(f.sub0(), on_atom, on_not, on_and, on_exists),
                    fold_formula<T>(f.sub1(), on_atom, on_not, on_and, on_exists));
    case Formula::Kind::Exists:
      return on_exists(f, f.bound_var(),
                       fold_formula<T>(f.sub0(), on_atom, on_not, on_and, on_exists));
  }
  throw ValidationError("unreachable formula kind");
}

// ---- set-level coding ----------------------------------------------------

// A formula code together with its witness: the sequence enumerating every
// distinct subformula once, dependency-ordered, ending at the code itself.
struct FormulaCode {
  HSet code;
  std::vector<HSet> witness;

  std::size_t length() const { return witness.size(); }
};

HSet formula_code(const Formula& f);
FormulaCode encode(const Formula& f, const Language& lang);
std::optional<Formula> decode(const HSet& code, const Language& lang);

bool is_atomic_code(const HSet& code, const Language& lang);

// The witness predicate: the verbatim build-from-earlier clauses plus the
// minimality constraint (no strictly shorter witness exists, i.e. the length
// equals the number of distinct subformulas). Malformed input yields false.
bool check_fml(const HSet& code, std::span<const HSet> witness, std::size_t n,
               const Language& lang);

// Distinct subformulas of a well-formed code; nullopt when the code is not a
// formula of the language.
std::optional<std::size_t> count_subformulas(const HSet& code, const Language& lang);

std::optional<std::uint32_t> max_var_in_code(const HSet& code, const Language& lang);

// ---- concrete syntax ------------------------------------------------------
//
//   phi ::= t "=" t | "U(" t ")" | "R(" t "," t ")" | "!" phi
//         | "(" phi "&" phi ")" | "E" var "." phi
//   t   ::= var | "c:" ident
//   var ::= "v" digits
//
// "(p | q)", "(p -> q)" and "A v. p" are sugar expanded before encoding.

// Maps the `c:name` surface syntax to constant pool elements, both ways.
class SymbolTable {
 public:
  void declare(const std::string& name, const HSet& value);
  std::optional<HSet> lookup(std::string_view name) const;
  std::optional<std::string> name_of(const HSet& value) const;
  const std::map<std::string, HSet>& entries() const { return by_name_; }

 private:
  std::map<std::string, HSet> by_name_;
  std::map<HSet, std::string, HSetLess> by_value_;
};

Formula parse_formula(std::string_view text, const SymbolTable& symbols = SymbolTable());
std::string to_text(const Formula& f, const SymbolTable& symbols = SymbolTable());

// ---- bounded enumeration ---------------------------------------------------

struct EnumOptions {
  std::size_t max_count = 20000;  // guard: abort beyond this many kept formulas
  std::size_t max_nodes = 9;      // structural size cap when no signature is given
  // Optional semantic fingerprint. When present, enumeration keeps one
  // representative per fingerprint and closes each quantifier level under
  // negation and conjunction until the fingerprints saturate, which keeps the
  // output finite without a size cap.
  std::function<std::string(const Formula&)> signature;
};

// All formulas over the language with quantifier rank <= qrank and variable
// indices < var_bound, up to shape pruning (no double negation, conjunctions
// ordered, vacuous quantifiers dropped) or up to the semantic fingerprint.
std::vector<Formula> enum_formulas(const Language& lang, std::size_t qrank,
                                   std::size_t var_bound,
                                   const EnumOptions& opts = EnumOptions());

}  // namespace hflab
