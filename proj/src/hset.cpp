#include "hflab/hset.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

namespace hflab {

struct HSet::Node {
  bool atom = false;
  std::uint64_t atom_id = 0;
  std::vector<HSet> elems;  // sorted by HSet::compare, duplicate-free
  std::size_t hash = 0;
};

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

struct NodeKeyHash {
  std::size_t operator()(const HSet::Node* n) const { return n->hash; }
};

struct NodeKeyEq {
  // Elements are already interned, so element-wise pointer equality decides.
  bool operator()(const HSet::Node* a, const HSet::Node* b) const {
    if (a->atom != b->atom) return false;
    if (a->atom) return a->atom_id == b->atom_id;
    if (a->elems.size() != b->elems.size()) return false;
    for (std::size_t i = 0; i < a->elems.size(); ++i)
      if (a->elems[i] != b->elems[i]) return false;
    return true;
  }
};

}  // namespace

class Interner {
 public:
  static Interner& instance() {
    static Interner it;
    return it;
  }

  const HSet::Node* empty() const { return empty_; }

  HSet atom(std::uint64_t id) {
    HSet::Node probe;
    probe.atom = true;
    probe.atom_id = id;
    probe.hash = mix(0x517cc1b7, static_cast<std::size_t>(id));
    return HSet(intern(std::move(probe)));
  }

  const HSet::Node* set(std::vector<HSet> elems) {
    std::sort(elems.begin(), elems.end(), HSetLess{});
    elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
    HSet::Node probe;
    probe.hash = 0x2545f491;
    for (const HSet& e : elems) probe.hash = mix(probe.hash, e.hash());
    probe.elems = std::move(elems);
    return intern(std::move(probe));
  }

 private:
  Interner() {
    HSet::Node probe;
    probe.hash = 0x2545f491;
    empty_ = intern(std::move(probe));
  }

  const HSet::Node* intern(HSet::Node&& probe) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = table_.find(&probe);
    if (it != table_.end()) return *it;
    auto* node = new HSet::Node(std::move(probe));
    table_.insert(node);
    return node;
  }

  std::mutex mu_;
  std::unordered_set<HSet::Node*, NodeKeyHash, NodeKeyEq> table_;
  const HSet::Node* empty_ = nullptr;
};

HSet::HSet() : node_(Interner::instance().empty()) {}

HSet HSet::empty_set() { return HSet(); }

HSet HSet::from_elements(std::vector<HSet> elems) {
  return HSet(Interner::instance().set(std::move(elems)));
}

bool HSet::is_atom() const { return node_->atom; }

std::uint64_t HSet::atom_id() const {
  if (!node_->atom) throw ValidationError("atom_id on a set");
  return node_->atom_id;
}

std::span<const HSet> HSet::elements() const {
  if (node_->atom) throw ValidationError("elements of an atom");
  return node_->elems;
}

std::size_t HSet::card() const { return node_->atom ? 0 : node_->elems.size(); }

bool HSet::contains(const HSet& x) const {
  if (node_->atom) return false;
  for (const HSet& e : node_->elems)
    if (e == x) return true;
  return false;
}

std::size_t HSet::hash() const { return node_->hash; }

int HSet::compare(const HSet& a, const HSet& b) {
  if (a.node_ == b.node_) return 0;
  if (a.is_atom() != b.is_atom()) return a.is_atom() ? -1 : 1;
  if (a.is_atom()) return a.atom_id() < b.atom_id() ? -1 : 1;
  const auto& ae = a.node_->elems;
  const auto& be = b.node_->elems;
  const std::size_t n = std::min(ae.size(), be.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = compare(ae[i], be[i]);
    if (c != 0) return c;
  }
  if (ae.size() != be.size()) return ae.size() < be.size() ? -1 : 1;
  return 0;
}

// ---- atoms ------------------------------------------------------------

namespace {

class AtomRegistry {
 public:
  static AtomRegistry& instance() {
    static AtomRegistry reg;
    return reg;
  }

  std::uint64_t id_for(std::string_view name) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = by_name_.find(std::string(name));
    if (it != by_name_.end()) return it->second;
    std::uint64_t id = names_.size();
    names_.emplace_back(name);
    by_name_.emplace(names_.back(), id);
    return id;
  }

  bool has(std::string_view name) {
    std::lock_guard<std::mutex> lock(mu_);
    return by_name_.count(std::string(name)) > 0;
  }

  const std::string& name_of(std::uint64_t id) {
    std::lock_guard<std::mutex> lock(mu_);
    if (id >= names_.size()) throw ValidationError("unregistered atom id");
    return names_[id];
  }

 private:
  std::mutex mu_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint64_t> by_name_;
};

bool valid_atom_name(std::string_view name) {
  if (name.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(name[0])) && name[0] != '_') return false;
  for (char c : name)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') return false;
  return true;
}

}  // namespace

HSet atom(std::string_view name) {
  if (!valid_atom_name(name))
    throw ValidationError("bad atom name: '" + std::string(name) + "'");
  return Interner::instance().atom(AtomRegistry::instance().id_for(name));
}

bool is_registered_atom_name(std::string_view name) {
  return AtomRegistry::instance().has(name);
}

const std::string& atom_name(const HSet& a) {
  if (!a.is_atom()) throw ValidationError("atom_name on a set");
  return AtomRegistry::instance().name_of(a.atom_id());
}

// ---- basic constructions ----------------------------------------------

HSet canon(std::vector<HSet> elems) { return HSet::from_elements(std::move(elems)); }

HSet singleton(const HSet& x) { return HSet::from_elements({x}); }

HSet doubleton(const HSet& x, const HSet& y) { return HSet::from_elements({x, y}); }

HSet set_insert(const HSet& s, const HSet& x) {
  std::vector<HSet> elems(s.elements().begin(), s.elements().end());
  elems.push_back(x);
  return HSet::from_elements(std::move(elems));
}

HSet set_union(const HSet& a, const HSet& b) {
  std::vector<HSet> elems(a.elements().begin(), a.elements().end());
  elems.insert(elems.end(), b.elements().begin(), b.elements().end());
  return HSet::from_elements(std::move(elems));
}

HSet set_intersection(const HSet& a, const HSet& b) {
  std::vector<HSet> elems;
  for (const HSet& e : a.elements())
    if (b.contains(e)) elems.push_back(e);
  return HSet::from_elements(std::move(elems));
}

HSet set_difference(const HSet& a, const HSet& b) {
  std::vector<HSet> elems;
  for (const HSet& e : a.elements())
    if (!b.contains(e)) elems.push_back(e);
  return HSet::from_elements(std::move(elems));
}

HSet union_all(const HSet& s) {
  std::vector<HSet> elems;
  for (const HSet& e : s.elements())
    if (e.is_set()) elems.insert(elems.end(), e.elements().begin(), e.elements().end());
  return HSet::from_elements(std::move(elems));
}

bool is_subset(const HSet& a, const HSet& b) {
  for (const HSet& e : a.elements())
    if (!b.contains(e)) return false;
  return true;
}

HSet kpair(const HSet& x, const HSet& y) {
  return doubleton(singleton(x), doubleton(x, y));
}

std::optional<std::pair<HSet, HSet>> kpair_parts(const HSet& p) {
  if (!p.is_set()) return std::nullopt;
  auto elems = p.elements();
  if (elems.size() == 1) {
    const HSet& s = elems[0];
    if (s.is_set() && s.card() == 1) return std::make_pair(s.elements()[0], s.elements()[0]);
    return std::nullopt;
  }
  if (elems.size() != 2) return std::nullopt;
  // One member must be {x}, the other {x,y}.
  for (int pick = 0; pick < 2; ++pick) {
    const HSet& a = elems[pick];
    const HSet& b = elems[1 - pick];
    if (a.is_set() && a.card() == 1 && b.is_set() && b.card() == 2) {
      HSet x = a.elements()[0];
      if (!b.contains(x)) continue;
      HSet y = (b.elements()[0] == x) ? b.elements()[1] : b.elements()[0];
      return std::make_pair(x, y);
    }
  }
  return std::nullopt;
}

HSet cart(const HSet& m, const HSet& n) {
  if (m.is_atom() || n.is_atom())
    throw ValidationError("cart expects sets, got an atom");
  std::vector<HSet> pairs;
  pairs.reserve(m.card() * n.card());
  for (const HSet& x : m.elements())
    for (const HSet& y : n.elements()) pairs.push_back(kpair(x, y));
  return HSet::from_elements(std::move(pairs));
}

HSet powerset(const HSet& a, const Guard& guard) {
  if (!a.is_set()) throw ValidationError("powerset of an atom");
  auto elems = a.elements();
  if (elems.size() > 30) throw GuardError("powerset of a set with > 30 elements");
  const std::size_t total = std::size_t{1} << elems.size();
  guard.tick(total);
  std::vector<HSet> subsets;
  subsets.reserve(total);
  for (std::size_t mask = 0; mask < total; ++mask) {
    std::vector<HSet> sub;
    for (std::size_t i = 0; i < elems.size(); ++i)
      if (mask & (std::size_t{1} << i)) sub.push_back(elems[i]);
    subsets.push_back(HSet::from_elements(std::move(sub)));
  }
  return HSet::from_elements(std::move(subsets));
}

std::vector<HSet> hereditary_closure(const HSet& x) {
  std::vector<HSet> out;
  std::unordered_set<const HSet::Node*> seen;
  std::vector<HSet> stack{x};
  while (!stack.empty()) {
    HSet cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur.raw()).second) continue;
    out.push_back(cur);
    if (cur.is_set())
      for (const HSet& e : cur.elements()) stack.push_back(e);
  }
  std::sort(out.begin(), out.end(), HSetLess{});
  return out;
}

// ---- arithmetic-free number theory ------------------------------------

namespace {
bool member(const HSet& x, const HSet& y) { return y.contains(x); }
}  // namespace

bool is_transitive(const HSet& x) {
  if (!x.is_set()) return false;
  for (const HSet& y : x.elements()) {
    if (y.is_atom()) continue;  // atoms are terminal
    for (const HSet& z : y.elements())
      if (!x.contains(z)) return false;
  }
  return true;
}

bool is_ord(const HSet& x) {
  if (!is_transitive(x)) return false;
  auto elems = x.elements();
  for (std::size_t i = 0; i < elems.size(); ++i)
    for (std::size_t j = 0; j < elems.size(); ++j) {
      const HSet& y = elems[i];
      const HSet& z = elems[j];
      if (!(member(y, z) || y == z || member(z, y))) return false;
    }
  return true;
}

bool is_succ(const HSet& x) {
  if (!x.is_set()) return false;
  for (const HSet& y : x.elements())
    if (y.is_set() && x == set_insert(y, y)) return true;
  return false;
}

bool is_nat(const HSet& x) {
  if (!is_ord(x)) return false;
  auto every = [](const HSet& y) { return y == HSet::empty_set() || is_succ(y); };
  for (const HSet& y : x.elements())
    if (!every(y)) return false;
  return every(x);
}

HSet nat(std::size_t n) {
  HSet cur = HSet::empty_set();
  for (std::size_t i = 0; i < n; ++i) cur = set_insert(cur, cur);
  return cur;
}

std::optional<std::size_t> as_nat(const HSet& x) {
  if (!is_nat(x)) return std::nullopt;
  return x.card();
}

// ---- tuple spaces -------------------------------------------------------

TupleSpace::TupleSpace(std::size_t n, HSet domain, const Guard& guard)
    : n_(n), domain_(std::move(domain)) {
  if (!domain_.is_set()) throw ValidationError("tuple space over an atom");
  const std::size_t m = domain_.card();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n_; ++i) {
    if (m != 0 && total > 2'000'000 / m) throw GuardError("tuple space too large");
    total *= m;
  }
  guard.tick(total + 1);
  elements_.reserve(total);
  std::vector<std::size_t> odo(n_, 0);
  std::vector<HSet> coords(n_);
  auto dom = domain_.elements();
  if (n_ == 0) {
    elements_.push_back(encode({}));
    return;
  }
  if (m == 0) return;
  while (true) {
    for (std::size_t i = 0; i < n_; ++i) coords[i] = dom[odo[i]];
    elements_.push_back(encode(coords));
    std::size_t i = n_;
    while (i > 0) {
      --i;
      if (++odo[i] < m) break;
      odo[i] = 0;
      if (i == 0) return;
    }
  }
}

HSet TupleSpace::as_hset() const {
  return HSet::from_elements(std::vector<HSet>(elements_.begin(), elements_.end()));
}

HSet TupleSpace::encode(std::span<const HSet> coords) const {
  if (coords.size() != n_) throw ValidationError("tuple arity mismatch");
  if (n_ == 0) return HSet::empty_set();
  HSet acc = kpair(nat(0), coords[0]);
  for (std::size_t i = 1; i < n_; ++i) acc = kpair(acc, kpair(nat(i), coords[i]));
  return acc;
}

std::vector<HSet> TupleSpace::decode(const HSet& tuple) const {
  std::vector<HSet> coords(n_);
  if (n_ == 0) {
    if (tuple != HSet::empty_set()) throw ValidationError("bad 0-tuple");
    return coords;
  }
  HSet cur = tuple;
  for (std::size_t i = n_; i-- > 1;) {
    auto parts = kpair_parts(cur);
    if (!parts) throw ValidationError("bad tuple shape");
    auto slot = kpair_parts(parts->second);
    if (!slot || slot->first != nat(i)) throw ValidationError("bad tuple slot");
    coords[i] = slot->second;
    cur = parts->first;
  }
  auto slot = kpair_parts(cur);
  if (!slot || slot->first != nat(0)) throw ValidationError("bad tuple slot");
  coords[0] = slot->second;
  return coords;
}

HSet TupleSpace::read(const HSet& tuple, std::size_t slot) const {
  auto coords = decode(tuple);
  if (slot >= coords.size()) throw ValidationError("tuple slot out of range");
  return coords[slot];
}

HSet TupleSpace::replace(const HSet& tuple, std::size_t slot, const HSet& value) const {
  auto coords = decode(tuple);
  if (slot >= coords.size()) throw ValidationError("tuple slot out of range");
  coords[slot] = value;
  return encode(coords);
}

bool TupleSpace::contains(const HSet& tuple) const {
  for (const HSet& e : elements_)
    if (e == tuple) return true;
  return false;
}

// ---- literal syntax -----------------------------------------------------

std::string to_string(const HSet& x, const PrintOptions& opts) {
  if (x.is_atom()) return "#" + atom_name(x);
  if (opts.nat_sugar && x.card() > 0) {
    if (auto n = as_nat(x)) return "n:" + std::to_string(*n);
  }
  std::string out = "{";
  bool first = true;
  for (const HSet& e : x.elements()) {
    if (!first) out += ",";
    first = false;
    out += to_string(e, opts);
  }
  out += "}";
  return out;
}

namespace detail {

void Cursor::skip_ws() {
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
}

bool Cursor::try_consume(char c) {
  skip_ws();
  if (!done() && text[pos] == c) {
    ++pos;
    return true;
  }
  return false;
}

void Cursor::expect(char c, const char* what) {
  if (!try_consume(c))
    fail(std::string("expected '") + c + "' (" + what + ")");
}

void Cursor::fail(const std::string& msg) const {
  throw ValidationError("parse error at position " + std::to_string(pos) + ": " + msg);
}

HSet parse_hset_at(Cursor& cur) {
  cur.skip_ws();
  if (cur.done()) cur.fail("unexpected end of input");
  char c = cur.peek();
  if (c == '{') {
    ++cur.pos;
    std::vector<HSet> elems;
    cur.skip_ws();
    if (cur.try_consume('}')) return HSet::from_elements({});
    while (true) {
      elems.push_back(parse_hset_at(cur));
      if (cur.try_consume('}')) break;
      cur.expect(',', "set element separator");
    }
    return HSet::from_elements(std::move(elems));
  }
  if (c == '#') {
    ++cur.pos;
    std::size_t start = cur.pos;
    while (!cur.done()) {
      char d = cur.peek();
      if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '.')
        ++cur.pos;
      else
        break;
    }
    if (cur.pos == start) cur.fail("empty atom name");
    return atom(cur.text.substr(start, cur.pos - start));
  }
  if (c == 'n' && cur.pos + 1 < cur.text.size() && cur.text[cur.pos + 1] == ':') {
    cur.pos += 2;
    std::size_t start = cur.pos;
    while (!cur.done() && std::isdigit(static_cast<unsigned char>(cur.peek()))) ++cur.pos;
    if (cur.pos == start) cur.fail("expected digits after n:");
    std::size_t value = 0;
    for (std::size_t i = start; i < cur.pos; ++i) value = value * 10 + (cur.text[i] - '0');
    if (value > 64) cur.fail("natural literal too large");
    return nat(value);
  }
  cur.fail("expected '{', '#' or 'n:'");
}

}  // namespace detail

HSet parse_hset(std::string_view text) {
  detail::Cursor cur{text, 0};
  HSet result = detail::parse_hset_at(cur);
  cur.skip_ws();
  if (!cur.done()) cur.fail("trailing input after set literal");
  return result;
}

}  // namespace hflab
