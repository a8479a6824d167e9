#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hflab/formula.hpp"
#include "hflab/hset.hpp"

namespace hflab {

// A structure ⟨M, U, R, I⟩ for a language with one unary predicate, one
// binary predicate and one constant per pool element. Predicates absent from
// the language simply have no component.
class Structure {
 public:
  // Validates all containments: U ⊆ M, R ⊆ M×M as Kuratowski pairs,
  // dom(I) = pool, ran(I) ⊆ M.
  static Structure make(Language lang, HSet domain, std::optional<HSet> u_set,
                        std::optional<HSet> r_set,
                        std::vector<std::pair<HSet, HSet>> constants);

  const Language& lang() const { return lang_; }
  const HSet& domain() const { return domain_; }
  const HSet& u_set() const { return u_set_; }  // meaningful iff lang().has_u
  const HSet& r_set() const { return r_set_; }  // meaningful iff lang().has_r
  const std::vector<std::pair<HSet, HSet>>& constants() const { return constants_; }

  bool in_u(const HSet& x) const { return u_set_.contains(x); }
  bool in_r(const HSet& x, const HSet& y) const { return r_set_.contains(kpair(x, y)); }
  std::optional<HSet> interp(const HSet& a) const;  // I(a)

  HSet i_as_hset() const;  // I as a set of Kuratowski pairs

  bool operator==(const Structure& other) const;
  bool operator!=(const Structure& other) const { return !(*this == other); }

 private:
  Language lang_;
  HSet domain_, u_set_, r_set_;
  std::vector<std::pair<HSet, HSet>> constants_;  // sorted by pool element
};

// Convenience constructors.
Structure graph_structure(const HSet& domain, const HSet& relation);  // language {R}
Structure graph_on_n(std::size_t n, const HSet& relation);            // domain 0..n-1

// ---- the explicit bottom-up satisfaction relation --------------------------

// An element of the assignment space over m slots.
struct Assignment {
  std::vector<HSet> values;  // slot i holds values[i]

  std::size_t slots() const { return values.size(); }
};

// Fault-injection switch for the self-test: each value corrupts exactly one
// clause of the bottom-up relation.
enum class SatMutation {
  none,
  negation_identity,     // negation stage no longer complements
  exists_fixed_slot,     // quantifier stage forgets the slot replacement
  const_eq_extensional,  // distinct constant names compare by interpretation
};

struct SatOutcome {
  bool truth;
  std::vector<HSet> stages;  // stages[k] = the assignment set for witness entry k
};

// Computes truth bottom-up over the encoded witness: stage k collects the
// assignment tuples satisfying witness entry k, with the constant-equality
// cases keyed on the constant indices exactly as the relation is written
// (distinct names yield the empty stage even when their interpretations
// coincide). Truth is membership of the given assignment in the final stage.
// Requires every variable index of the formula, free or bound, to lie below
// the slot count.
SatOutcome sat_oracle(const Structure& s, const FormulaCode& code, const Assignment& e,
                      SatMutation mutation = SatMutation::none,
                      const Guard& guard = Guard());

// Slot count convention used by the callers: max variable index + 1 (0 for
// variable-free formulas).
std::size_t slot_count_for(const Formula& f);

// ---- direct recursive evaluation -------------------------------------------

using Env = std::map<std::uint32_t, HSet>;

// Standard recursive truth. Constants go through the interpretation, so a
// constant-constant equation is decided by value, which can disagree with
// sat_oracle when the interpretation is not injective.
bool eval(const Structure& s, const Formula& f, const Env& env = Env());

bool sentence_holds(const Structure& s, const Formula& f);

// ---- probe fingerprints for the formula enumerator -------------------------

// Truth record of a formula across every assignment of the probe structures,
// over var_bound slots; two formulas with equal fingerprints are
// indistinguishable on the probes.
std::function<std::string(const Formula&)> probe_signature(
    std::vector<Structure> probes, std::size_t var_bound);

// Every structure over the language {R} with domain 0..n-1 for n <= max_size.
std::vector<Structure> all_graph_structures(std::size_t max_size);

// ---- rank-bounded preservation kernel ---------------------------------------
//
// A finite list of formulas with free variables among v0..v_{params-1} and
// quantifier rank <= qrank whose Boolean closure covers, up to equivalence on
// the two given structures, every formula within those bounds. Agreement on
// the kernel therefore decides agreement on the whole rank fragment. Built by
// refining assignment-type partitions level by level; the emitted formulas
// are ordinary syntax evaluated by the ordinary evaluator.
std::vector<Formula> rank_kernel_formulas(const Structure& s, const Structure& t,
                                          std::size_t params, std::size_t qrank,
                                          const Guard& guard = Guard());

// Agreement at one position: every kernel formula holds of (a-side slots) in
// s exactly when it holds of (b-side slots) in t.
bool kernel_agreement(const Structure& s, const Structure& t,
                      std::span<const std::pair<HSet, HSet>> position, std::size_t qrank,
                      const Guard& guard = Guard());

// ---- structure files --------------------------------------------------------
//
//   domain: lit, lit, ...
//   U: lit, ...                 (present iff the language has U)
//   R: (lit, lit), ...          (present iff the language has R)
//   I: name -> lit, ...         (pool indices are atoms named by `name`)
//
// Elements are set literals. Repeated section keys extend the section.

struct NamedStructure {
  Structure structure;
  SymbolTable symbols;
};

NamedStructure parse_structure(std::string_view text);
std::string to_text(const NamedStructure& ns);

}  // namespace hflab
