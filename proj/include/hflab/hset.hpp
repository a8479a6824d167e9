#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hflab/error.hpp"

namespace hflab {

// A hereditarily finite set over an optional pool of urelement atoms.
//
// Values are interned: equal sets share one node, so operator== is a pointer
// comparison and HSet is cheap to copy and hash. Element vectors are stored
// duplicate-free in a run-independent structural order (atoms before sets,
// atoms by id, sets lexicographically by their ordered elements), which makes
// printing and enumeration deterministic. All values are immutable; the
// interning table is the only shared mutable state and is mutex-protected.
class HSet {
 public:
  struct Node;

  HSet();  // the empty set

  static HSet empty_set();
  static HSet from_elements(std::vector<HSet> elems);  // dedups, sorts, interns

  bool is_atom() const;
  bool is_set() const { return !is_atom(); }

  std::uint64_t atom_id() const;          // requires is_atom
  std::span<const HSet> elements() const;  // requires is_set
  std::size_t card() const;                // |x| for sets, 0 for atoms
  bool contains(const HSet& x) const;      // false for atoms

  std::size_t hash() const;

  friend bool operator==(const HSet& a, const HSet& b) { return a.node_ == b.node_; }
  friend bool operator!=(const HSet& a, const HSet& b) { return a.node_ != b.node_; }

  // Structural total order; identical across runs.
  static int compare(const HSet& a, const HSet& b);
  friend bool operator<(const HSet& a, const HSet& b) { return compare(a, b) < 0; }

  const Node* raw() const { return node_; }

 private:
  friend class Interner;
  explicit HSet(const Node* n) : node_(n) {}
  const Node* node_;
};

struct HSetHash {
  std::size_t operator()(const HSet& x) const { return x.hash(); }
};

struct HSetLess {
  bool operator()(const HSet& a, const HSet& b) const { return HSet::compare(a, b) < 0; }
};

// ---- atoms ------------------------------------------------------------

// Atoms are a disjoint sort, never equal to any set. Each atom carries a
// registered name used by the #name literal syntax.
HSet atom(std::string_view name);
bool is_registered_atom_name(std::string_view name);
const std::string& atom_name(const HSet& a);

// ---- basic constructions ----------------------------------------------

HSet canon(std::vector<HSet> elems);  // alias of HSet::from_elements
HSet singleton(const HSet& x);
HSet doubleton(const HSet& x, const HSet& y);
HSet set_insert(const HSet& s, const HSet& x);
HSet set_union(const HSet& a, const HSet& b);
HSet set_intersection(const HSet& a, const HSet& b);
HSet set_difference(const HSet& a, const HSet& b);
HSet union_all(const HSet& s);  // ⋃s; atom members have no elements to contribute
bool is_subset(const HSet& a, const HSet& b);

// Kuratowski pair {{x},{x,y}} and its projections.
HSet kpair(const HSet& x, const HSet& y);
std::optional<std::pair<HSet, HSet>> kpair_parts(const HSet& p);

// Cartesian product as a set of Kuratowski pairs; rejects atom arguments.
HSet cart(const HSet& m, const HSet& n);

// All subsets of a; the work guard bounds 2^|a|.
HSet powerset(const HSet& a, const Guard& guard = Guard());

// Every set reachable through the element relation, the argument included.
// Atoms are terminal and appear in the result.
std::vector<HSet> hereditary_closure(const HSet& x);

// ---- arithmetic-free number theory ------------------------------------

bool is_transitive(const HSet& x);
bool is_ord(const HSet& x);   // transitive + linear membership trichotomy
bool is_succ(const HSet& x);  // some y in x with x = y ∪ {y}
bool is_nat(const HSet& x);

HSet nat(std::size_t n);  // von Neumann encoding
std::optional<std::size_t> as_nat(const HSet& x);

// ---- n-tuple spaces ----------------------------------------------------

// The set of all n-tuples ⟨⟨0,x0⟩,…,⟨n−1,x_{n−1}⟩⟩ with coordinates in a
// fixed domain, materialized. n-tuples nest to the left; a 1-tuple is the
// single slot pair and the 0-tuple is the empty set, so the space for n = 0
// contains exactly one element.
class TupleSpace {
 public:
  TupleSpace(std::size_t n, HSet domain, const Guard& guard = Guard());

  std::size_t arity() const { return n_; }
  const HSet& domain() const { return domain_; }
  const std::vector<HSet>& elements() const { return elements_; }
  HSet as_hset() const;

  HSet encode(std::span<const HSet> coords) const;
  std::vector<HSet> decode(const HSet& tuple) const;  // throws on foreign shapes
  HSet read(const HSet& tuple, std::size_t slot) const;
  HSet replace(const HSet& tuple, std::size_t slot, const HSet& value) const;
  bool contains(const HSet& tuple) const;

 private:
  std::size_t n_;
  HSet domain_;
  std::vector<HSet> elements_;
};

// ---- literal syntax ----------------------------------------------------
//
//   set   := "{" [lit ("," lit)*] "}"
//   lit   := set | "#" ident | "n:" digits
//   ident := [A-Za-z_][A-Za-z0-9_.]*
//
// n:k is sugar for the von Neumann natural k. Printing emits plain braces
// and atoms, with naturals >= 1 printed back through the sugar.

struct PrintOptions {
  bool nat_sugar = true;
};

std::string to_string(const HSet& x, const PrintOptions& opts = PrintOptions());
HSet parse_hset(std::string_view text);

namespace detail {
// Cursor shared with the formula and permutation parsers.
struct Cursor {
  std::string_view text;
  std::size_t pos = 0;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  void skip_ws();
  bool try_consume(char c);
  void expect(char c, const char* what);
  [[noreturn]] void fail(const std::string& msg) const;
};

HSet parse_hset_at(Cursor& cur);
}  // namespace detail

}  // namespace hflab
