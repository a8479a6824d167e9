#include "hflab/formula.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace hflab {

struct Formula::Node {
  Kind kind;
  Term t0, t1;
  std::shared_ptr<const Node> c0, c1;
  std::uint32_t var = 0;
};

Formula Formula::eq(Term a, Term b) {
  return Formula(std::make_shared<const Node>(
      Node{Kind::Eq, std::move(a), std::move(b), nullptr, nullptr, 0}));
}

Formula Formula::pred_u(Term a) {
  return Formula(std::make_shared<const Node>(
      Node{Kind::U, std::move(a), Term{}, nullptr, nullptr, 0}));
}

Formula Formula::pred_r(Term a, Term b) {
  return Formula(std::make_shared<const Node>(
      Node{Kind::R, std::move(a), std::move(b), nullptr, nullptr, 0}));
}

Formula Formula::negation(Formula f) {
  return Formula(std::make_shared<const Node>(
      Node{Kind::Not, Term{}, Term{}, f.node_, nullptr, 0}));
}

Formula Formula::conjunction(Formula a, Formula b) {
  return Formula(std::make_shared<const Node>(
      Node{Kind::And, Term{}, Term{}, a.node_, b.node_, 0}));
}

Formula Formula::exists(std::uint32_t var, Formula body) {
  return Formula(std::make_shared<const Node>(
      Node{Kind::Exists, Term{}, Term{}, body.node_, nullptr, var}));
}

Formula Formula::disjunction(Formula a, Formula b) {
  return negation(conjunction(negation(std::move(a)), negation(std::move(b))));
}

Formula Formula::implies(Formula a, Formula b) {
  return negation(conjunction(std::move(a), negation(std::move(b))));
}

Formula Formula::forall(std::uint32_t var, Formula body) {
  return negation(exists(var, negation(std::move(body))));
}

Formula::Kind Formula::kind() const { return node_->kind; }

const Term& Formula::term0() const { return node_->t0; }

const Term& Formula::term1() const { return node_->t1; }

Formula Formula::sub0() const { return Formula(node_->c0); }

Formula Formula::sub1() const { return Formula(node_->c1); }

std::uint32_t Formula::bound_var() const { return node_->var; }

bool Formula::is_atomic() const {
  return kind() == Kind::Eq || kind() == Kind::U || kind() == Kind::R;
}

namespace {

void collect_free(const Formula& f, std::set<std::uint32_t>& bound,
                  std::set<std::uint32_t>& out) {
  auto note = [&](const Term& t) {
    if (t.is_var() && !bound.count(t.var)) out.insert(t.var);
  };
  switch (f.kind()) {
    case Formula::Kind::Eq:
    case Formula::Kind::R:
      note(f.term0());
      note(f.term1());
      return;
    case Formula::Kind::U:
      note(f.term0());
      return;
    case Formula::Kind::Not:
      collect_free(f.sub0(), bound, out);
      return;
    case Formula::Kind::And:
      collect_free(f.sub0(), bound, out);
      collect_free(f.sub1(), bound, out);
      return;
    case Formula::Kind::Exists: {
      bool fresh = bound.insert(f.bound_var()).second;
      collect_free(f.sub0(), bound, out);
      if (fresh) bound.erase(f.bound_var());
      return;
    }
  }
}

}  // namespace

std::set<std::uint32_t> Formula::free_vars() const {
  std::set<std::uint32_t> bound, out;
  collect_free(*this, bound, out);
  return out;
}

std::optional<std::uint32_t> Formula::max_var_index() const {
  std::optional<std::uint32_t> best;
  auto note = [&](std::uint32_t v) {
    if (!best || v > *best) best = v;
  };
  auto note_term = [&](const Term& t) {
    if (t.is_var()) note(t.var);
  };
  switch (kind()) {
    case Kind::Eq:
    case Kind::R:
      note_term(term0());
      note_term(term1());
      break;
    case Kind::U:
      note_term(term0());
      break;
    case Kind::Not:
      if (auto m = sub0().max_var_index()) note(*m);
      break;
    case Kind::And: {
      if (auto m = sub0().max_var_index()) note(*m);
      if (auto m = sub1().max_var_index()) note(*m);
      break;
    }
    case Kind::Exists: {
      note(bound_var());
      if (auto m = sub0().max_var_index()) note(*m);
      break;
    }
  }
  return best;
}

std::size_t Formula::quantifier_rank() const {
  switch (kind()) {
    case Kind::Eq:
    case Kind::U:
    case Kind::R:
      return 0;
    case Kind::Not:
      return sub0().quantifier_rank();
    case Kind::And:
      return std::max(sub0().quantifier_rank(), sub1().quantifier_rank());
    case Kind::Exists:
      return 1 + sub0().quantifier_rank();
  }
  return 0;
}

std::size_t Formula::node_count() const {
  switch (kind()) {
    case Kind::Eq:
    case Kind::U:
    case Kind::R:
      return 1;
    case Kind::Not:
    case Kind::Exists:
      return 1 + sub0().node_count();
    case Kind::And:
      return 1 + sub0().node_count() + sub1().node_count();
  }
  return 1;
}

namespace {

int compare_terms(const Term& a, const Term& b) {
  if (a.is_var() != b.is_var()) return a.is_var() ? -1 : 1;
  if (a.is_var()) return a.var < b.var ? -1 : (a.var > b.var ? 1 : 0);
  return HSet::compare(a.constant, b.constant);
}

}  // namespace

int Formula::compare(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return 0;
  int ka = static_cast<int>(a.kind());
  int kb = static_cast<int>(b.kind());
  if (ka != kb) return ka < kb ? -1 : 1;
  switch (a.kind()) {
    case Kind::Eq:
    case Kind::R: {
      int c = compare_terms(a.term0(), b.term0());
      if (c != 0) return c;
      return compare_terms(a.term1(), b.term1());
    }
    case Kind::U:
      return compare_terms(a.term0(), b.term0());
    case Kind::Not:
      return compare(a.sub0(), b.sub0());
    case Kind::And: {
      int c = compare(a.sub0(), b.sub0());
      if (c != 0) return c;
      return compare(a.sub1(), b.sub1());
    }
    case Kind::Exists: {
      if (a.bound_var() != b.bound_var()) return a.bound_var() < b.bound_var() ? -1 : 1;
      return compare(a.sub0(), b.sub0());
    }
  }
  return 0;
}

bool Formula::operator==(const Formula& other) const { return compare(*this, other) == 0; }

// ---- set-level coding ------------------------------------------------------

HSet term_code(const Term& t) {
  if (t.is_var()) return kpair(nat(0), nat(t.var));
  return kpair(nat(1), t.constant);
}

std::optional<Term> decode_term(const HSet& code) {
  auto parts = kpair_parts(code);
  if (!parts) return std::nullopt;
  if (parts->first == nat(0)) {
    auto n = as_nat(parts->second);
    if (!n) return std::nullopt;
    return Term::variable(static_cast<std::uint32_t>(*n));
  }
  if (parts->first == nat(1)) return Term::constant_of(parts->second);
  return std::nullopt;
}

HSet formula_code(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Eq:
      return kpair(kpair(nat(kSymEq), term_code(f.term0())), term_code(f.term1()));
    case Formula::Kind::U:
      return kpair(nat(kSymU), term_code(f.term0()));
    case Formula::Kind::R:
      return kpair(kpair(nat(kSymR), term_code(f.term0())), term_code(f.term1()));
    case Formula::Kind::Not:
      return kpair(nat(kSymNot), formula_code(f.sub0()));
    case Formula::Kind::And:
      return kpair(kpair(nat(kSymAnd), formula_code(f.sub0())), formula_code(f.sub1()));
    case Formula::Kind::Exists:
      return kpair(kpair(nat(kSymExists), nat(f.bound_var())), formula_code(f.sub0()));
  }
  throw ValidationError("unreachable formula kind");
}

namespace {

void check_constants(const Formula& f, const Language& lang) {
  auto check_term = [&](const Term& t) {
    if (!lang.declares(t))
      throw ValidationError("constant outside pool: " + to_string(t.constant));
  };
  switch (f.kind()) {
    case Formula::Kind::Eq:
    case Formula::Kind::R:
      check_term(f.term0());
      check_term(f.term1());
      if (f.kind() == Formula::Kind::R && !lang.has_r)
        throw ValidationError("predicate R not declared in language");
      return;
    case Formula::Kind::U:
      check_term(f.term0());
      if (!lang.has_u) throw ValidationError("predicate U not declared in language");
      return;
    case Formula::Kind::Not:
      check_constants(f.sub0(), lang);
      return;
    case Formula::Kind::And:
      check_constants(f.sub0(), lang);
      check_constants(f.sub1(), lang);
      return;
    case Formula::Kind::Exists:
      check_constants(f.sub0(), lang);
      return;
  }
}

void collect_witness(const Formula& f, std::vector<HSet>& out,
                     std::unordered_set<const HSet::Node*>& seen) {
  switch (f.kind()) {
    case Formula::Kind::Eq:
    case Formula::Kind::U:
    case Formula::Kind::R:
      break;
    case Formula::Kind::Not:
    case Formula::Kind::Exists:
      collect_witness(f.sub0(), out, seen);
      break;
    case Formula::Kind::And:
      collect_witness(f.sub0(), out, seen);
      collect_witness(f.sub1(), out, seen);
      break;
  }
  HSet code = formula_code(f);
  if (seen.insert(code.raw()).second) out.push_back(code);
}

}  // namespace

FormulaCode encode(const Formula& f, const Language& lang) {
  check_constants(f, lang);
  FormulaCode fc;
  fc.code = formula_code(f);
  std::unordered_set<const HSet::Node*> seen;
  collect_witness(f, fc.witness, seen);
  return fc;
}

bool is_atomic_code(const HSet& code, const Language& lang) {
  auto outer = kpair_parts(code);
  if (!outer) return false;
  if (outer->first == nat(kSymU)) {
    if (!lang.has_u) return false;
    auto t = decode_term(outer->second);
    return t.has_value() && lang.declares(*t);
  }
  auto inner = kpair_parts(outer->first);
  if (!inner) return false;
  if (inner->first == nat(kSymEq) || inner->first == nat(kSymR)) {
    if (inner->first == nat(kSymR) && !lang.has_r) return false;
    auto t = decode_term(inner->second);
    auto s = decode_term(outer->second);
    return t && s && lang.declares(*t) && lang.declares(*s);
  }
  return false;
}

std::optional<Formula> decode(const HSet& code, const Language& lang) {
  auto outer = kpair_parts(code);
  if (!outer) return std::nullopt;
  if (outer->first == nat(kSymNot)) {
    auto body = decode(outer->second, lang);
    if (!body) return std::nullopt;
    return Formula::negation(*body);
  }
  if (outer->first == nat(kSymU)) {
    if (!lang.has_u) return std::nullopt;
    auto t = decode_term(outer->second);
    if (!t || !lang.declares(*t)) return std::nullopt;
    return Formula::pred_u(*t);
  }
  auto inner = kpair_parts(outer->first);
  if (!inner) return std::nullopt;
  if (inner->first == nat(kSymEq) || inner->first == nat(kSymR)) {
    if (inner->first == nat(kSymR) && !lang.has_r) return std::nullopt;
    auto t = decode_term(inner->second);
    auto s = decode_term(outer->second);
    if (!t || !s || !lang.declares(*t) || !lang.declares(*s)) return std::nullopt;
    return inner->first == nat(kSymEq) ? Formula::eq(*t, *s) : Formula::pred_r(*t, *s);
  }
  if (inner->first == nat(kSymAnd)) {
    auto a = decode(inner->second, lang);
    auto b = decode(outer->second, lang);
    if (!a || !b) return std::nullopt;
    return Formula::conjunction(*a, *b);
  }
  if (inner->first == nat(kSymExists)) {
    auto m = as_nat(inner->second);
    auto body = decode(outer->second, lang);
    if (!m || !body) return std::nullopt;
    return Formula::exists(static_cast<std::uint32_t>(*m), *body);
  }
  return std::nullopt;
}

namespace {

bool collect_subcodes(const HSet& code, const Language& lang,
                      std::unordered_set<const HSet::Node*>& seen) {
  if (seen.count(code.raw())) return true;
  if (is_atomic_code(code, lang)) {
    seen.insert(code.raw());
    return true;
  }
  auto outer = kpair_parts(code);
  if (!outer) return false;
  if (outer->first == nat(kSymNot)) {
    if (!collect_subcodes(outer->second, lang, seen)) return false;
    seen.insert(code.raw());
    return true;
  }
  auto inner = kpair_parts(outer->first);
  if (!inner) return false;
  if (inner->first == nat(kSymAnd)) {
    if (!collect_subcodes(inner->second, lang, seen)) return false;
    if (!collect_subcodes(outer->second, lang, seen)) return false;
    seen.insert(code.raw());
    return true;
  }
  if (inner->first == nat(kSymExists)) {
    if (!is_nat(inner->second)) return false;
    if (!collect_subcodes(outer->second, lang, seen)) return false;
    seen.insert(code.raw());
    return true;
  }
  return false;
}

}  // namespace

std::optional<std::size_t> count_subformulas(const HSet& code, const Language& lang) {
  std::unordered_set<const HSet::Node*> seen;
  if (!collect_subcodes(code, lang, seen)) return std::nullopt;
  return seen.size();
}

bool check_fml(const HSet& code, std::span<const HSet> witness, std::size_t n,
               const Language& lang) {
  if (n == 0 || witness.size() != n) return false;
  if (witness[n - 1] != code) return false;
  auto earlier = [&](const HSet& c, std::size_t k) {
    for (std::size_t j = 0; j < k; ++j)
      if (witness[j] == c) return true;
    return false;
  };
  for (std::size_t k = 0; k < n; ++k) {
    const HSet& e = witness[k];
    if (is_atomic_code(e, lang)) continue;
    bool ok = false;
    if (auto outer = kpair_parts(e)) {
      if (outer->first == nat(kSymNot)) {
        ok = earlier(outer->second, k);
      } else if (auto inner = kpair_parts(outer->first)) {
        if (inner->first == nat(kSymAnd))
          ok = earlier(inner->second, k) && earlier(outer->second, k);
        else if (inner->first == nat(kSymExists))
          ok = is_nat(inner->second) && earlier(outer->second, k);
      }
    }
    if (!ok) return false;
  }
  auto minimal = count_subformulas(code, lang);
  return minimal.has_value() && *minimal == n;
}

std::optional<std::uint32_t> max_var_in_code(const HSet& code, const Language& lang) {
  auto f = decode(code, lang);
  if (!f) throw ValidationError("not a formula code of the language");
  return f->max_var_index();
}

// ---- concrete syntax ---------------------------------------------------

void SymbolTable::declare(const std::string& name, const HSet& value) {
  auto it = by_name_.find(name);
  if (it != by_name_.end() && it->second != value)
    throw ValidationError("constant name redeclared: " + name);
  by_name_.emplace(name, value);
  by_value_.emplace(value, name);
}

std::optional<HSet> SymbolTable::lookup(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> SymbolTable::name_of(const HSet& value) const {
  auto it = by_value_.find(value);
  if (it == by_value_.end()) return std::nullopt;
  return it->second;
}

namespace {

using detail::Cursor;

std::uint32_t parse_var(Cursor& cur) {
  cur.skip_ws();
  if (cur.done() || cur.peek() != 'v') cur.fail("expected a variable");
  ++cur.pos;
  std::size_t start = cur.pos;
  while (!cur.done() && std::isdigit(static_cast<unsigned char>(cur.peek()))) ++cur.pos;
  if (cur.pos == start) cur.fail("expected digits after 'v'");
  std::uint64_t value = 0;
  for (std::size_t i = start; i < cur.pos; ++i) value = value * 10 + (cur.text[i] - '0');
  if (value > 1'000'000) cur.fail("variable index too large");
  return static_cast<std::uint32_t>(value);
}

Term parse_term(Cursor& cur, const SymbolTable& symbols) {
  cur.skip_ws();
  if (cur.done()) cur.fail("expected a term");
  if (cur.peek() == 'v') return Term::variable(parse_var(cur));
  if (cur.peek() == 'c' && cur.pos + 1 < cur.text.size() && cur.text[cur.pos + 1] == ':') {
    cur.pos += 2;
    std::size_t start = cur.pos;
    while (!cur.done()) {
      char d = cur.peek();
      if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '.')
        ++cur.pos;
      else
        break;
    }
    if (cur.pos == start) cur.fail("empty constant name");
    std::string name(cur.text.substr(start, cur.pos - start));
    auto value = symbols.lookup(name);
    if (!value) cur.fail("unknown constant name: " + name);
    return Term::constant_of(*value);
  }
  cur.fail("expected a term (variable or c:name)");
  throw ValidationError("unreachable");
}

Formula parse_phi(Cursor& cur, const SymbolTable& symbols) {
  cur.skip_ws();
  if (cur.done()) cur.fail("expected a formula");
  char c = cur.peek();
  if (c == '!') {
    ++cur.pos;
    return Formula::negation(parse_phi(cur, symbols));
  }
  if (c == 'E' || c == 'A') {
    ++cur.pos;
    std::uint32_t var = parse_var(cur);
    cur.expect('.', "quantifier body");
    Formula body = parse_phi(cur, symbols);
    return c == 'E' ? Formula::exists(var, body) : Formula::forall(var, body);
  }
  if (c == '(') {
    ++cur.pos;
    Formula lhs = parse_phi(cur, symbols);
    cur.skip_ws();
    if (cur.try_consume('&')) {
      Formula rhs = parse_phi(cur, symbols);
      cur.expect(')', "conjunction");
      return Formula::conjunction(lhs, rhs);
    }
    if (cur.try_consume('|')) {
      Formula rhs = parse_phi(cur, symbols);
      cur.expect(')', "disjunction");
      return Formula::disjunction(lhs, rhs);
    }
    if (cur.try_consume('-')) {
      cur.expect('>', "implication arrow");
      Formula rhs = parse_phi(cur, symbols);
      cur.expect(')', "implication");
      return Formula::implies(lhs, rhs);
    }
    cur.fail("expected '&', '|' or '->'");
  }
  if (c == 'U' && cur.pos + 1 < cur.text.size() && cur.text[cur.pos + 1] == '(') {
    cur.pos += 2;
    Term t = parse_term(cur, symbols);
    cur.expect(')', "U atom");
    return Formula::pred_u(t);
  }
  if (c == 'R' && cur.pos + 1 < cur.text.size() && cur.text[cur.pos + 1] == '(') {
    cur.pos += 2;
    Term t = parse_term(cur, symbols);
    cur.expect(',', "R atom");
    Term s = parse_term(cur, symbols);
    cur.expect(')', "R atom");
    return Formula::pred_r(t, s);
  }
  Term t = parse_term(cur, symbols);
  cur.expect('=', "equation");
  Term s = parse_term(cur, symbols);
  return Formula::eq(t, s);
}

}  // namespace

Formula parse_formula(std::string_view text, const SymbolTable& symbols) {
  Cursor cur{text, 0};
  Formula f = parse_phi(cur, symbols);
  cur.skip_ws();
  if (!cur.done()) cur.fail("trailing input after formula");
  return f;
}

namespace {

std::string term_text(const Term& t, const SymbolTable& symbols) {
  if (t.is_var()) return "v" + std::to_string(t.var);
  auto name = symbols.name_of(t.constant);
  if (!name)
    throw ValidationError("constant has no declared name: " + to_string(t.constant));
  return "c:" + *name;
}

}  // namespace

std::string to_text(const Formula& f, const SymbolTable& symbols) {
  switch (f.kind()) {
    case Formula::Kind::Eq:
      return term_text(f.term0(), symbols) + "=" + term_text(f.term1(), symbols);
    case Formula::Kind::U:
      return "U(" + term_text(f.term0(), symbols) + ")";
    case Formula::Kind::R:
      return "R(" + term_text(f.term0(), symbols) + "," + term_text(f.term1(), symbols) + ")";
    case Formula::Kind::Not:
      return "!" + to_text(f.sub0(), symbols);
    case Formula::Kind::And:
      return "(" + to_text(f.sub0(), symbols) + " & " + to_text(f.sub1(), symbols) + ")";
    case Formula::Kind::Exists:
      return "E v" + std::to_string(f.bound_var()) + ". " + to_text(f.sub0(), symbols);
  }
  throw ValidationError("unreachable formula kind");
}

// ---- bounded enumeration -------------------------------------------------

namespace {

std::vector<Formula> atomic_formulas(const Language& lang, std::size_t var_bound) {
  std::vector<Term> terms;
  for (std::uint32_t v = 0; v < var_bound; ++v) terms.push_back(Term::variable(v));
  if (lang.pool.is_set())
    for (const HSet& a : lang.pool.elements()) terms.push_back(Term::constant_of(a));
  std::vector<Formula> out;
  for (std::size_t i = 0; i < terms.size(); ++i)
    for (std::size_t j = i; j < terms.size(); ++j)  // t=s and s=t share a shape
      out.push_back(Formula::eq(terms[i], terms[j]));
  if (lang.has_u)
    for (const Term& t : terms) out.push_back(Formula::pred_u(t));
  if (lang.has_r)
    for (const Term& t : terms)
      for (const Term& s : terms) out.push_back(Formula::pred_r(t, s));
  return out;
}

}  // namespace

std::vector<Formula> enum_formulas(const Language& lang, std::size_t qrank,
                                   std::size_t var_bound, const EnumOptions& opts) {
  std::vector<Formula> kept;

  if (opts.signature) {
    std::unordered_set<std::string> seen;
    auto add = [&](const Formula& f) -> bool {
      std::string sig = opts.signature(f);
      if (!seen.insert(std::move(sig)).second) return false;
      if (kept.size() >= opts.max_count)
        throw GuardError("formula enumeration exceeded " + std::to_string(opts.max_count));
      kept.push_back(f);
      return true;
    };
    auto boolean_closure = [&]() {
      bool grew = true;
      while (grew) {
        grew = false;
        for (std::size_t i = 0; i < kept.size(); ++i)
          if (add(Formula::negation(kept[i]))) grew = true;
        for (std::size_t i = 0; i < kept.size(); ++i)
          for (std::size_t j = i + 1; j < kept.size(); ++j)
            if (add(Formula::conjunction(kept[i], kept[j]))) grew = true;
      }
    };
    for (const Formula& a : atomic_formulas(lang, var_bound)) add(a);
    boolean_closure();
    for (std::size_t level = 0; level < qrank; ++level) {
      std::vector<Formula> snapshot = kept;
      for (const Formula& f : snapshot)
        for (std::uint32_t v = 0; v < var_bound; ++v) add(Formula::exists(v, f));
      boolean_closure();
    }
    return kept;
  }

  // Shape-level enumeration: formulas indexed by node count; conjunctions are
  // kept in canonical argument order, double negations and vacuous
  // quantifiers are dropped.
  std::vector<std::vector<Formula>> by_size(opts.max_nodes + 1);
  auto add = [&](std::size_t size, const Formula& f) {
    if (size > opts.max_nodes) return;
    if (kept.size() >= opts.max_count)
      throw GuardError("formula enumeration exceeded " + std::to_string(opts.max_count));
    by_size[size].push_back(f);
    kept.push_back(f);
  };
  for (const Formula& a : atomic_formulas(lang, var_bound)) add(1, a);
  for (std::size_t size = 2; size <= opts.max_nodes; ++size) {
    for (const Formula& f : by_size[size - 1]) {
      if (f.kind() != Formula::Kind::Not) add(size, Formula::negation(f));
      if (f.quantifier_rank() < qrank)
        for (std::uint32_t v = 0; v < var_bound; ++v)
          if (f.free_vars().count(v)) add(size, Formula::exists(v, f));
    }
    for (std::size_t ls = 1; ls + 1 < size; ++ls)
      for (const Formula& a : by_size[ls])
        for (const Formula& b : by_size[size - 1 - ls])
          if (Formula::compare(a, b) < 0) add(size, Formula::conjunction(a, b));
  }
  std::sort(kept.begin(), kept.end(), [](const Formula& a, const Formula& b) {
    if (a.node_count() != b.node_count()) return a.node_count() < b.node_count();
    return Formula::compare(a, b) < 0;
  });
  return kept;
}

}  // namespace hflab
