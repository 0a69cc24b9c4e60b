#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "cwc/atom.hpp"
#include "cwc/multiset.hpp"

namespace cwc {

using AtomBag = Multiset<Atom>;

class SimpleTerm;

/// A term: multiset of simple terms, always held in canonical form.
/// Two terms are structurally congruent iff they compare equal.
class Term {
 public:
  using Entry = Counted<SimpleTerm>;

  Term() = default;
  explicit Term(Multiset<SimpleTerm> elements);

  static Term canonicalize(const std::vector<SimpleTerm>& raw);

  const Multiset<SimpleTerm>& elements() const { return elements_; }
  const std::vector<Entry>& entries() const { return elements_.entries(); }
  const Entry& operator[](std::size_t i) const { return elements_[i]; }
  std::size_t distinct() const { return elements_.distinct(); }
  bool empty() const { return elements_.empty(); }

  /// Occurrences at this level.
  std::uint64_t total() const { return elements_.total(); }
  /// Atom occurrences at every level, wraps included.
  std::uint64_t atom_total() const { return atoms_; }
  /// Simple-term occurrences at every level plus wrap atoms.
  std::uint64_t size() const { return size_; }
  /// Compartment nesting depth; 0 when there are no compartments.
  std::uint32_t depth() const { return depth_; }

  std::uint64_t count(const SimpleTerm& s) const;
  bool contains(const Term& sub) const { return elements_.contains(sub.elements_); }
  Term plus(const Term& other) const { return Term(elements_.plus(other.elements_)); }
  Term minus(const Term& sub) const { return Term(elements_.minus(sub.elements_)); }
  Term with(const SimpleTerm& s, std::uint64_t n = 1) const;
  Term without(const SimpleTerm& s, std::uint64_t n = 1) const;

  friend int compare(const Term& a, const Term& b);
  friend bool operator==(const Term& a, const Term& b) { return compare(a, b) == 0; }
  friend bool operator<(const Term& a, const Term& b) { return compare(a, b) < 0; }

 private:
  void refresh();

  Multiset<SimpleTerm> elements_;
  std::uint64_t atoms_ = 0;
  std::uint64_t size_ = 0;
  std::uint32_t depth_ = 0;
};

struct Compartment {
  AtomBag wrap;
  Term content;

  /// False only for compartments with no atom anywhere inside, wrap included.
  /// Copies of such compartments cannot be told apart even after labelling.
  bool atom_bearing() const { return !wrap.empty() || content.atom_total() > 0; }
};

class SimpleTerm {
 public:
  static SimpleTerm atom(Atom a) { return SimpleTerm(a); }
  static SimpleTerm compartment(AtomBag wrap, Term content) {
    return SimpleTerm(Compartment{std::move(wrap), std::move(content)});
  }

  bool is_atom() const { return std::holds_alternative<Atom>(node_); }
  bool is_compartment() const { return !is_atom(); }
  Atom as_atom() const { return std::get<Atom>(node_); }
  const Compartment& as_compartment() const { return std::get<Compartment>(node_); }

  /// Atoms before compartments; atoms by name; compartments by (wrap, content).
  friend int compare(const SimpleTerm& a, const SimpleTerm& b) {
    if (a.is_atom() != b.is_atom()) return a.is_atom() ? -1 : 1;
    if (a.is_atom()) return compare(a.as_atom(), b.as_atom());
    const auto& ca = a.as_compartment();
    const auto& cb = b.as_compartment();
    if (int c = compare(ca.wrap, cb.wrap); c != 0) return c;
    return compare(ca.content, cb.content);
  }
  friend bool operator==(const SimpleTerm& a, const SimpleTerm& b) { return compare(a, b) == 0; }

 private:
  explicit SimpleTerm(Atom a) : node_(a) {}
  explicit SimpleTerm(Compartment c) : node_(std::move(c)) {}

  std::variant<Atom, Compartment> node_;
};

inline Term::Term(Multiset<SimpleTerm> elements) : elements_(std::move(elements)) { refresh(); }

inline Term Term::canonicalize(const std::vector<SimpleTerm>& raw) {
  std::vector<Entry> entries;
  entries.reserve(raw.size());
  for (const auto& s : raw) entries.push_back(Entry{s, 1});
  return Term(Multiset<SimpleTerm>::from_unsorted(std::move(entries)));
}

inline std::uint64_t Term::count(const SimpleTerm& s) const { return elements_.count(s); }

inline Term Term::with(const SimpleTerm& s, std::uint64_t n) const {
  auto copy = elements_;
  copy.add(s, n);
  return Term(std::move(copy));
}

inline Term Term::without(const SimpleTerm& s, std::uint64_t n) const {
  auto copy = elements_;
  if (!copy.remove(s, n)) throw Error("Term::without: element not present");
  return Term(std::move(copy));
}

inline int compare(const Term& a, const Term& b) {
  if (&a == &b) return 0;
  return compare(a.elements_, b.elements_);
}

/// Structural congruence. Canonical form makes it plain equality.
inline bool equiv(const Term& a, const Term& b) { return a == b; }

inline void Term::refresh() {
  atoms_ = 0;
  size_ = 0;
  depth_ = 0;
  for (const auto& e : elements_) {
    size_ += e.count;
    if (e.value.is_atom()) {
      atoms_ += e.count;
    } else {
      const auto& c = e.value.as_compartment();
      std::uint64_t wrap_atoms = c.wrap.total();
      atoms_ += e.count * (wrap_atoms + c.content.atom_total());
      size_ += e.count * (wrap_atoms + c.content.size());
      depth_ = std::max(depth_, c.content.depth() + 1);
    }
  }
}

inline AtomBag make_bag(std::initializer_list<Atom> atoms) {
  AtomBag bag;
  for (auto a : atoms) bag.add(a);
  return bag;
}

// ---------------------------------------------------------------------------
// Paths address compartment contents (context holes).

class InvalidPath : public Error {
 public:
  using Error::Error;
};

struct PathStep {
  std::size_t element = 0;  // index into the canonical entries of the level
  std::uint64_t copy = 0;   // which copy among the entry's multiplicity

  friend auto operator<=>(const PathStep&, const PathStep&) = default;
};

struct Path {
  std::vector<PathStep> steps;

  bool is_top() const { return steps.empty(); }
  Path child(std::size_t element, std::uint64_t copy = 0) const {
    Path p = *this;
    p.steps.push_back({element, copy});
    return p;
  }
  friend auto operator<=>(const Path&, const Path&) = default;
};

inline std::string to_string(const Path& p) {
  if (p.steps.empty()) return "/";
  std::string out;
  for (const auto& s : p.steps) {
    out += '/';
    out += std::to_string(s.element);
    out += '.';
    out += std::to_string(s.copy);
  }
  return out;
}

inline const Compartment& step_into(const Term& t, const PathStep& s) {
  if (s.element >= t.distinct()) throw InvalidPath("path step " + std::to_string(s.element) + " out of range");
  const auto& e = t[s.element];
  if (!e.value.is_compartment()) throw InvalidPath("path step " + std::to_string(s.element) + " is not a compartment");
  if (s.copy >= e.count) throw InvalidPath("path copy index " + std::to_string(s.copy) + " out of range");
  return e.value.as_compartment();
}

/// The content at the hole addressed by `p`; the whole term for the top path.
inline const Term& resolve(const Term& t, const Path& p) {
  const Term* cur = &t;
  for (const auto& s : p.steps) cur = &step_into(*cur, s).content;
  return *cur;
}

namespace detail {
inline Term replace_from(const Term& t, const std::vector<PathStep>& steps, std::size_t i, const Term& content) {
  if (i == steps.size()) return content;
  const auto& comp = step_into(t, steps[i]);
  const SimpleTerm& old = t[steps[i].element].value;
  auto next = SimpleTerm::compartment(comp.wrap, replace_from(comp.content, steps, i + 1, content));
  auto elems = t.elements();
  elems.remove(old, 1);
  elems.add(next, 1);
  return Term(std::move(elems));
}
}  // namespace detail

/// C[new_content] where C is the context that `p` determines in `t`.
inline Term replace_at(const Term& t, const Path& p, const Term& new_content) {
  return detail::replace_from(t, p.steps, 0, new_content);
}

/// Product, along the path, of the multiplicities of the compartments it
/// crosses, counting only copies that are distinguishable (atom-bearing).
inline std::uint64_t context_multiplicity(const Term& t, const Path& p) {
  std::uint64_t m = 1;
  const Term* cur = &t;
  for (const auto& s : p.steps) {
    const auto& comp = step_into(*cur, s);
    if (comp.atom_bearing()) m *= (*cur)[s.element].count;
    cur = &comp.content;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Observable measurements.

struct Scope {
  enum class Kind { Top, Anywhere, Inside, OnWrap };
  Kind kind = Kind::Top;
  std::optional<Atom> marker;  // required for Inside, optional for OnWrap

  static Scope top() { return {Kind::Top, std::nullopt}; }
  static Scope anywhere() { return {Kind::Anywhere, std::nullopt}; }
  static Scope inside(Atom m) { return {Kind::Inside, m}; }
  static Scope on_wrap(std::optional<Atom> m = std::nullopt) { return {Kind::OnWrap, m}; }
};

inline std::uint64_t count_atom(const Term& t, Atom a, const Scope& scope) {
  const auto key = SimpleTerm::atom(a);
  std::uint64_t n = 0;
  switch (scope.kind) {
    case Scope::Kind::Top:
      return t.count(key);
    case Scope::Kind::Anywhere:
      n = t.count(key);
      for (const auto& e : t.entries())
        if (e.value.is_compartment()) n += e.count * count_atom(e.value.as_compartment().content, a, scope);
      return n;
    case Scope::Kind::Inside:
      for (const auto& e : t.entries()) {
        if (!e.value.is_atom()) {
          const auto& c = e.value.as_compartment();
          std::uint64_t here = c.wrap.count(*scope.marker) > 0 ? c.content.count(key) : 0;
          n += e.count * (here + count_atom(c.content, a, scope));
        }
      }
      return n;
    case Scope::Kind::OnWrap:
      for (const auto& e : t.entries()) {
        if (!e.value.is_atom()) {
          const auto& c = e.value.as_compartment();
          bool selected = !scope.marker || c.wrap.count(*scope.marker) > 0;
          std::uint64_t here = selected ? c.wrap.count(a) : 0;
          n += e.count * (here + count_atom(c.content, a, scope));
        }
      }
      return n;
  }
  return n;
}

// ---------------------------------------------------------------------------
// Text form: atoms as identifiers, compartments as `(wrap | content)`,
// the empty term as `*`.

inline void write_term(std::string& out, const Term& t);

inline void write_simple(std::string& out, const SimpleTerm& s) {
  if (s.is_atom()) {
    out += s.as_atom().name();
    return;
  }
  const auto& c = s.as_compartment();
  out += '(';
  for (const auto& w : c.wrap) {
    for (std::uint64_t i = 0; i < w.count; ++i) {
      out += w.value.name();
      out += ' ';
    }
  }
  out += "| ";
  write_term(out, c.content);
  out += ')';
}

inline void write_term(std::string& out, const Term& t) {
  if (t.empty()) {
    out += '*';
    return;
  }
  bool first = true;
  for (const auto& e : t.entries()) {
    for (std::uint64_t i = 0; i < e.count; ++i) {
      if (!first) out += ' ';
      first = false;
      write_simple(out, e.value);
    }
  }
}

inline std::string to_string(const Term& t) {
  std::string out;
  write_term(out, t);
  return out;
}

inline std::string to_string(const AtomBag& b) {
  if (b.empty()) return "*";
  std::string out;
  for (const auto& e : b) {
    for (std::uint64_t i = 0; i < e.count; ++i) {
      if (!out.empty()) out += ' ';
      out += e.value.name();
    }
  }
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const Term& t) { return os << to_string(t); }
inline std::ostream& operator<<(std::ostream& os, const Path& p) { return os << to_string(p); }

}  // namespace cwc
