#include "hflab/satisfaction.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace hflab {

Structure Structure::make(Language lang, HSet domain, std::optional<HSet> u_set,
                          std::optional<HSet> r_set,
                          std::vector<std::pair<HSet, HSet>> constants) {
  if (!domain.is_set()) throw ValidationError("structure domain must be a set");
  if (lang.has_u != u_set.has_value())
    throw ValidationError("U component must be present exactly when the language has U");
  if (lang.has_r != r_set.has_value())
    throw ValidationError("R component must be present exactly when the language has R");

  Structure s;
  s.lang_ = std::move(lang);
  s.domain_ = std::move(domain);
  s.u_set_ = u_set.value_or(HSet::empty_set());
  s.r_set_ = r_set.value_or(HSet::empty_set());

  if (!is_subset(s.u_set_, s.domain_))
    throw ValidationError("U must be a subset of the domain");
  for (const HSet& p : s.r_set_.elements()) {
    auto parts = kpair_parts(p);
    if (!parts || !s.domain_.contains(parts->first) || !s.domain_.contains(parts->second))
      throw ValidationError("R must consist of pairs over the domain");
  }

  std::sort(constants.begin(), constants.end(),
            [](const auto& a, const auto& b) { return HSet::compare(a.first, b.first) < 0; });
  std::vector<HSet> pool_elems;
  for (const auto& [a, v] : constants) {
    if (!pool_elems.empty() && pool_elems.back() == a)
      throw ValidationError("duplicate constant assignment: " + to_string(a));
    pool_elems.push_back(a);
    if (!s.domain_.contains(v))
      throw ValidationError("constant value outside the domain: " + to_string(v));
  }
  if (HSet::from_elements(pool_elems) != s.lang_.pool)
    throw ValidationError("constant assignment must cover the pool exactly");
  s.constants_ = std::move(constants);
  return s;
}

std::optional<HSet> Structure::interp(const HSet& a) const {
  auto it = std::lower_bound(
      constants_.begin(), constants_.end(), a,
      [](const auto& entry, const HSet& key) { return HSet::compare(entry.first, key) < 0; });
  if (it == constants_.end() || it->first != a) return std::nullopt;
  return it->second;
}

HSet Structure::i_as_hset() const {
  std::vector<HSet> pairs;
  pairs.reserve(constants_.size());
  for (const auto& [a, v] : constants_) pairs.push_back(kpair(a, v));
  return HSet::from_elements(std::move(pairs));
}

bool Structure::operator==(const Structure& other) const {
  return lang_ == other.lang_ && domain_ == other.domain_ && u_set_ == other.u_set_ &&
         r_set_ == other.r_set_ && constants_ == other.constants_;
}

Structure graph_structure(const HSet& domain, const HSet& relation) {
  return Structure::make(lang_r_only(), domain, std::nullopt, relation, {});
}

Structure graph_on_n(std::size_t n, const HSet& relation) {
  return graph_structure(nat(n), relation);
}

// ---- bottom-up satisfaction -------------------------------------------------

std::size_t slot_count_for(const Formula& f) {
  auto mv = f.max_var_index();
  return mv ? *mv + 1 : 0;
}

namespace {

struct StageBuilder {
  const Structure& s;
  const TupleSpace& space;
  std::size_t slots;

  HSet full() const { return space.as_hset(); }

  HSet filter(const std::function<bool(const HSet&)>& keep) const {
    std::vector<HSet> kept;
    for (const HSet& h : space.elements())
      if (keep(h)) kept.push_back(h);
    return HSet::from_elements(std::move(kept));
  }

  HSet interp_or_fail(const HSet& a) const {
    auto v = s.interp(a);
    if (!v)
      throw ValidationError("structure/language mismatch: no interpretation for " +
                            to_string(a));
    return *v;
  }

  std::size_t slot_or_fail(const Term& t) const {
    if (t.var >= slots)
      throw ValidationError("variable index v" + std::to_string(t.var) +
                            " out of slot range (m=" + std::to_string(slots) + ")");
    return t.var;
  }
};

}  // namespace

SatOutcome sat_oracle(const Structure& s, const FormulaCode& code, const Assignment& e,
                      SatMutation mutation, const Guard& guard) {
  const std::size_t n = code.witness.size();
  if (!check_fml(code.code, code.witness, n, s.lang()))
    throw ValidationError("structure/language mismatch: not a minimal witness over "
                          "this structure's language");
  for (const HSet& v : e.values)
    if (!s.domain().contains(v))
      throw ValidationError("assignment value outside the domain: " + to_string(v));

  const std::size_t m = e.slots();
  TupleSpace space(m, s.domain(), guard);
  StageBuilder b{s, space, m};

  std::vector<HSet> stages(n);
  auto earlier = [&](const HSet& c, std::size_t k) -> std::size_t {
    for (std::size_t j = 0; j < k; ++j)
      if (code.witness[j] == c) return j;
    throw ValidationError("witness entry references a later stage");
  };

  for (std::size_t k = 0; k < n; ++k) {
    guard.tick(space.elements().size() + 1);
    const HSet& entry = code.witness[k];
    auto outer = kpair_parts(entry);
    if (outer && outer->first == nat(kSymNot)) {
      const HSet prev = stages[earlier(outer->second, k)];
      stages[k] = (mutation == SatMutation::negation_identity)
                      ? prev
                      : set_difference(space.as_hset(), prev);
      continue;
    }
    if (outer && outer->first == nat(kSymU)) {
      Term t = *decode_term(outer->second);
      if (t.is_var()) {
        std::size_t i = b.slot_or_fail(t);
        stages[k] = b.filter([&](const HSet& h) { return s.in_u(space.read(h, i)); });
      } else {
        stages[k] = s.in_u(b.interp_or_fail(t.constant)) ? b.full() : HSet::empty_set();
      }
      continue;
    }
    std::optional<std::pair<HSet, HSet>> inner;
    if (outer) inner = kpair_parts(outer->first);
    if (!inner) throw ValidationError("malformed witness entry");
    if (inner->first == nat(kSymEq) || inner->first == nat(kSymR)) {
      const bool is_eq = inner->first == nat(kSymEq);
      Term t = *decode_term(inner->second);
      Term u = *decode_term(outer->second);
      auto holds = [&](const HSet& x, const HSet& y) {
        return is_eq ? x == y : s.in_r(x, y);
      };
      if (t.is_var() && u.is_var()) {
        std::size_t i = b.slot_or_fail(t), j = b.slot_or_fail(u);
        stages[k] =
            b.filter([&](const HSet& h) { return holds(space.read(h, i), space.read(h, j)); });
      } else if (t.is_var()) {
        std::size_t i = b.slot_or_fail(t);
        HSet v = b.interp_or_fail(u.constant);
        stages[k] = b.filter([&](const HSet& h) { return holds(space.read(h, i), v); });
      } else if (u.is_var()) {
        std::size_t j = b.slot_or_fail(u);
        HSet v = b.interp_or_fail(t.constant);
        stages[k] = b.filter([&](const HSet& h) { return holds(v, space.read(h, j)); });
      } else if (is_eq) {
        // Keyed on the constant indices: distinct names give the empty stage.
        bool same = (mutation == SatMutation::const_eq_extensional)
                        ? b.interp_or_fail(t.constant) == b.interp_or_fail(u.constant)
                        : t.constant == u.constant;
        b.interp_or_fail(t.constant);
        b.interp_or_fail(u.constant);
        stages[k] = same ? b.full() : HSet::empty_set();
      } else {
        bool rel = s.in_r(b.interp_or_fail(t.constant), b.interp_or_fail(u.constant));
        stages[k] = rel ? b.full() : HSet::empty_set();
      }
      continue;
    }
    if (inner->first == nat(kSymAnd)) {
      const HSet lhs = stages[earlier(inner->second, k)];
      const HSet rhs = stages[earlier(outer->second, k)];
      stages[k] = set_intersection(lhs, rhs);
      continue;
    }
    if (inner->first == nat(kSymExists)) {
      auto slot = as_nat(inner->second);
      if (!slot) throw ValidationError("malformed quantifier entry");
      if (*slot >= m)
        throw ValidationError("variable index v" + std::to_string(*slot) +
                              " out of slot range (m=" + std::to_string(m) + ")");
      const HSet body = stages[earlier(outer->second, k)];
      stages[k] = b.filter([&](const HSet& h) {
        for (const HSet& x : s.domain().elements()) {
          HSet moved = (mutation == SatMutation::exists_fixed_slot)
                           ? h
                           : space.replace(h, *slot, x);
          if (body.contains(moved)) return true;
        }
        return false;
      });
      continue;
    }
    throw ValidationError("malformed witness entry");
  }

  SatOutcome out;
  out.stages = std::move(stages);
  out.truth = out.stages.back().contains(space.encode(e.values));
  return out;
}

// ---- recursive evaluation ---------------------------------------------------

namespace {

HSet term_value(const Structure& s, const Term& t, const Env& env) {
  if (t.is_var()) {
    auto it = env.find(t.var);
    if (it == env.end())
      throw ValidationError("unbound free variable v" + std::to_string(t.var));
    return it->second;
  }
  auto v = s.interp(t.constant);
  if (!v)
    throw ValidationError("structure/language mismatch: no interpretation for " +
                          to_string(t.constant));
  return *v;
}

bool eval_rec(const Structure& s, const Formula& f, Env& env) {
  switch (f.kind()) {
    case Formula::Kind::Eq:
      return term_value(s, f.term0(), env) == term_value(s, f.term1(), env);
    case Formula::Kind::U:
      if (!s.lang().has_u) throw ValidationError("structure/language mismatch: no U");
      return s.in_u(term_value(s, f.term0(), env));
    case Formula::Kind::R:
      if (!s.lang().has_r) throw ValidationError("structure/language mismatch: no R");
      return s.in_r(term_value(s, f.term0(), env), term_value(s, f.term1(), env));
    case Formula::Kind::Not:
      return !eval_rec(s, f.sub0(), env);
    case Formula::Kind::And:
      return eval_rec(s, f.sub0(), env) && eval_rec(s, f.sub1(), env);
    case Formula::Kind::Exists: {
      auto saved = env.find(f.bound_var());
      std::optional<HSet> old;
      if (saved != env.end()) old = saved->second;
      bool found = false;
      for (const HSet& x : s.domain().elements()) {
        env[f.bound_var()] = x;
        if (eval_rec(s, f.sub0(), env)) {
          found = true;
          break;
        }
      }
      if (old)
        env[f.bound_var()] = *old;
      else
        env.erase(f.bound_var());
      return found;
    }
  }
  throw ValidationError("unreachable formula kind");
}

}  // namespace

bool eval(const Structure& s, const Formula& f, const Env& env) {
  for (std::uint32_t v : f.free_vars())
    if (!env.count(v))
      throw ValidationError("unbound free variable v" + std::to_string(v));
  for (const auto& [v, x] : env)
    if (!s.domain().contains(x))
      throw ValidationError("environment value outside the domain: " + to_string(x));
  Env scratch = env;
  return eval_rec(s, f, scratch);
}

bool sentence_holds(const Structure& s, const Formula& f) {
  if (!f.free_vars().empty()) throw ValidationError("sentence evaluation on an open formula");
  return eval(s, f, Env{});
}

// ---- probe fingerprints -----------------------------------------------------

std::function<std::string(const Formula&)> probe_signature(std::vector<Structure> probes,
                                                           std::size_t var_bound) {
  return [probes = std::move(probes), var_bound](const Formula& f) {
    std::string sig;
    for (const Structure& p : probes) {
      auto dom = p.domain().elements();
      std::vector<std::size_t> odo(var_bound, 0);
      if (var_bound == 0 || !dom.empty()) {
        while (true) {
          Env env;
          for (std::size_t i = 0; i < var_bound; ++i)
            env[static_cast<std::uint32_t>(i)] = dom[odo[i]];
          sig += eval(p, f, env) ? '1' : '0';
          if (var_bound == 0) break;
          std::size_t i = var_bound;
          bool done = false;
          while (i > 0) {
            --i;
            if (++odo[i] < dom.size()) break;
            odo[i] = 0;
            if (i == 0) done = true;
          }
          if (done) break;
        }
      }
      sig += '|';
    }
    return sig;
  };
}

std::vector<Structure> all_graph_structures(std::size_t max_size) {
  std::vector<Structure> out;
  for (std::size_t n = 0; n <= max_size; ++n) {
    std::vector<HSet> pairs;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) pairs.push_back(kpair(nat(i), nat(j)));
    const std::size_t bits = n * n;
    for (std::size_t mask = 0; mask < (std::size_t{1} << bits); ++mask) {
      std::vector<HSet> rel;
      for (std::size_t b = 0; b < bits; ++b)
        if (mask & (std::size_t{1} << b)) rel.push_back(pairs[b]);
      out.push_back(graph_on_n(n, HSet::from_elements(std::move(rel))));
    }
  }
  return out;
}

// ---- rank-bounded preservation kernel ----------------------------------------

namespace {

struct KernelBuilder {
  const Structure& s;
  const Structure& t;
  const Guard& guard;

  // All c-tuples over both structures, s-side first, odometer order.
  struct Point {
    const Structure* st;
    std::vector<HSet> coords;
  };

  std::vector<Point> points(std::size_t c) const {
    std::vector<Point> out;
    for (const Structure* st : {&s, &t}) {
      auto dom = st->domain().elements();
      if (c == 0) {
        out.push_back({st, {}});
        continue;
      }
      if (dom.empty()) continue;
      std::vector<std::size_t> odo(c, 0);
      while (true) {
        Point p{st, {}};
        for (std::size_t i = 0; i < c; ++i) p.coords.push_back(dom[odo[i]]);
        out.push_back(std::move(p));
        std::size_t i = c;
        bool done = false;
        while (i > 0) {
          --i;
          if (++odo[i] < dom.size()) break;
          odo[i] = 0;
          if (i == 0) done = true;
        }
        if (done) break;
      }
    }
    return out;
  }

  std::vector<Formula> atomics(std::size_t c) const {
    const Language& lang = s.lang();
    std::vector<Term> terms;
    for (std::uint32_t v = 0; v < c; ++v) terms.push_back(Term::variable(v));
    std::vector<Term> consts;
    if (lang.pool.is_set())
      for (const HSet& a : lang.pool.elements()) consts.push_back(Term::constant_of(a));
    std::vector<Formula> out;
    for (std::size_t i = 0; i < terms.size(); ++i)
      for (std::size_t j = i + 1; j < terms.size(); ++j)
        out.push_back(Formula::eq(terms[i], terms[j]));
    for (const Term& v : terms)
      for (const Term& a : consts) out.push_back(Formula::eq(v, a));
    for (std::size_t i = 0; i < consts.size(); ++i)
      for (std::size_t j = i + 1; j < consts.size(); ++j)
        out.push_back(Formula::eq(consts[i], consts[j]));
    if (lang.has_u) {
      for (const Term& v : terms) out.push_back(Formula::pred_u(v));
      for (const Term& a : consts) out.push_back(Formula::pred_u(a));
    }
    if (lang.has_r) {
      std::vector<Term> all = terms;
      all.insert(all.end(), consts.begin(), consts.end());
      for (const Term& x : all)
        for (const Term& y : all) out.push_back(Formula::pred_r(x, y));
    }
    return out;
  }

  bool truth(const Formula& f, const Point& p) const {
    Env env;
    for (std::size_t i = 0; i < p.coords.size(); ++i)
      env[static_cast<std::uint32_t>(i)] = p.coords[i];
    return eval(*p.st, f, env);
  }

  // Distinct truth-type conjunctions of the generators over the c-tuple
  // points, ordered by first realizing point.
  std::vector<Formula> blocks(std::size_t c, const std::vector<Formula>& generators) const {
    auto pts = points(c);
    std::vector<Formula> out;
    std::vector<std::vector<bool>> seen_types;
    for (const auto& p : pts) {
      guard.tick(generators.size() + 1);
      std::vector<bool> type;
      type.reserve(generators.size());
      for (const Formula& g : generators) type.push_back(truth(g, p));
      bool fresh = true;
      for (const auto& old : seen_types) fresh = fresh && (old != type);
      if (!fresh) continue;
      seen_types.push_back(type);
      std::optional<Formula> conj;
      for (std::size_t i = 0; i < generators.size(); ++i) {
        Formula lit = type[i] ? generators[i] : Formula::negation(generators[i]);
        conj = conj ? Formula::conjunction(*conj, lit) : lit;
      }
      if (!conj) conj = Formula::eq(Term::variable(0), Term::variable(0));  // c >= 1 here
      out.push_back(*conj);
    }
    return out;
  }

  std::vector<Formula> generators(std::size_t c, std::size_t rank) const {
    std::vector<Formula> out = atomics(c);
    if (rank > 0) {
      std::vector<Formula> deeper = generators(c + 1, rank - 1);
      for (const Formula& b : blocks(c + 1, deeper))
        out.push_back(Formula::exists(static_cast<std::uint32_t>(c), b));
    }
    return out;
  }
};

}  // namespace

std::vector<Formula> rank_kernel_formulas(const Structure& s, const Structure& t,
                                          std::size_t params, std::size_t qrank,
                                          const Guard& guard) {
  if (s.lang() != t.lang())
    throw ValidationError("kernel requires structures over one language");
  KernelBuilder kb{s, t, guard};
  return kb.generators(params, qrank);
}

bool kernel_agreement(const Structure& s, const Structure& t,
                      std::span<const std::pair<HSet, HSet>> position, std::size_t qrank,
                      const Guard& guard) {
  auto kernel = rank_kernel_formulas(s, t, position.size(), qrank, guard);
  Env env_s, env_t;
  for (std::size_t i = 0; i < position.size(); ++i) {
    env_s[static_cast<std::uint32_t>(i)] = position[i].first;
    env_t[static_cast<std::uint32_t>(i)] = position[i].second;
  }
  for (const Formula& f : kernel) {
    guard.tick();
    if (eval(s, f, env_s) != eval(t, f, env_t)) return false;
  }
  return true;
}

// ---- structure files ----------------------------------------------------------

namespace {

std::vector<std::string> split_top_level(const std::string& text) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : text) {
    if (c == '{' || c == '(') ++depth;
    if (c == '}' || c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  // trim and drop empties
  std::vector<std::string> trimmed;
  for (std::string& item : out) {
    std::size_t a = item.find_first_not_of(" \t\r");
    std::size_t b = item.find_last_not_of(" \t\r");
    if (a == std::string::npos) continue;
    trimmed.push_back(item.substr(a, b - a + 1));
  }
  return trimmed;
}

}  // namespace

NamedStructure parse_structure(std::string_view text) {
  std::map<std::string, std::string> sections;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    std::size_t colon = line.find(':');
    if (colon == std::string::npos)
      throw ValidationError("structure file line without a section key: " + line);
    std::string key = line.substr(first, colon - first);
    std::size_t kend = key.find_last_not_of(" \t");
    key = key.substr(0, kend + 1);
    if (key != "domain" && key != "U" && key != "R" && key != "I")
      throw ValidationError("unknown structure section: " + key);
    std::string& slot = sections[key];
    std::string rest = line.substr(colon + 1);
    if (!slot.empty() && !rest.empty()) slot += ",";
    slot += rest;
  }
  if (!sections.count("domain")) throw ValidationError("structure file without a domain");

  std::vector<HSet> dom;
  for (const std::string& item : split_top_level(sections["domain"]))
    dom.push_back(parse_hset(item));

  Language lang;
  lang.has_u = sections.count("U") > 0;
  lang.has_r = sections.count("R") > 0;

  std::optional<HSet> u_set, r_set;
  if (lang.has_u) {
    std::vector<HSet> elems;
    for (const std::string& item : split_top_level(sections["U"]))
      elems.push_back(parse_hset(item));
    u_set = HSet::from_elements(std::move(elems));
  }
  if (lang.has_r) {
    std::vector<HSet> elems;
    for (const std::string& item : split_top_level(sections["R"])) {
      detail::Cursor cur{item, 0};
      cur.expect('(', "relation pair");
      HSet x = detail::parse_hset_at(cur);
      cur.expect(',', "relation pair");
      HSet y = detail::parse_hset_at(cur);
      cur.expect(')', "relation pair");
      cur.skip_ws();
      if (!cur.done()) cur.fail("trailing input after pair");
      elems.push_back(kpair(x, y));
    }
    r_set = HSet::from_elements(std::move(elems));
  }

  SymbolTable symbols;
  std::vector<std::pair<HSet, HSet>> constants;
  std::vector<HSet> pool_elems;
  if (sections.count("I")) {
    for (const std::string& item : split_top_level(sections["I"])) {
      std::size_t arrow = item.find("->");
      if (arrow == std::string::npos)
        throw ValidationError("constant entry without '->': " + item);
      std::string name = item.substr(0, arrow);
      std::size_t e = name.find_last_not_of(" \t");
      name = name.substr(0, e == std::string::npos ? 0 : e + 1);
      std::size_t b = name.find_first_not_of(" \t");
      if (b == std::string::npos) throw ValidationError("empty constant name");
      name = name.substr(b);
      HSet value = parse_hset(item.substr(arrow + 2));
      HSet index = atom(name);
      symbols.declare(name, index);
      constants.emplace_back(index, value);
      pool_elems.push_back(index);
    }
  }
  lang.pool = HSet::from_elements(pool_elems);

  NamedStructure ns{Structure::make(lang, HSet::from_elements(std::move(dom)), u_set,
                                    r_set, std::move(constants)),
                    symbols};
  return ns;
}

std::string to_text(const NamedStructure& ns) {
  const Structure& s = ns.structure;
  std::string out = "domain:";
  bool first = true;
  for (const HSet& x : s.domain().elements()) {
    out += first ? " " : ", ";
    out += to_string(x);
    first = false;
  }
  out += "\n";
  if (s.lang().has_u) {
    out += "U:";
    first = true;
    for (const HSet& x : s.u_set().elements()) {
      out += first ? " " : ", ";
      out += to_string(x);
      first = false;
    }
    out += "\n";
  }
  if (s.lang().has_r) {
    out += "R:";
    first = true;
    for (const HSet& p : s.r_set().elements()) {
      auto parts = kpair_parts(p);
      out += first ? " " : ", ";
      out += "(" + to_string(parts->first) + ", " + to_string(parts->second) + ")";
      first = false;
    }
    out += "\n";
  }
  if (!s.constants().empty()) {
    out += "I:";
    first = true;
    for (const auto& [a, v] : s.constants()) {
      auto name = ns.symbols.name_of(a);
      if (!name) throw ValidationError("constant index has no name: " + to_string(a));
      out += first ? " " : ", ";
      out += *name + " -> " + to_string(v);
      first = false;
    }
    out += "\n";
  }
  return out;
}

}  // namespace hflab
