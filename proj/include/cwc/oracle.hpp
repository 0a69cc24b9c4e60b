#pragma once

// Brute-force reference for the mass-action match count. It labels every atom
// of the matched content, enumerates every embedding of the rule's left-hand
// side (as written, not as compiled by the matcher) into the labelled term,
// and counts distinct labelled variable assignments per erased outcome.
// Exponential; meant for small inputs and tests.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cwc/pattern.hpp"
#include "cwc/term.hpp"

namespace cwc {

class OracleLimitExceeded : public Error {
 public:
  using Error::Error;
};

struct OracleLimits {
  std::uint64_t max_atoms = 16;
  std::uint32_t max_depth = 4;
  std::uint64_t max_embeddings = 5'000'000;
};

struct LabelledAtom {
  Atom atom;
  std::uint64_t label;
};

struct LabelledSimple {
  bool is_atom = true;
  std::optional<LabelledAtom> atom;
  std::vector<LabelledAtom> wrap;
  std::vector<LabelledSimple> content;
};

using LabelledTerm = std::vector<LabelledSimple>;

namespace oracle_detail {

inline std::string key(const LabelledAtom& a) { return a.atom.name() + "#" + std::to_string(a.label); }

inline std::string key(const std::vector<LabelledSimple>& t);

inline std::string key(const LabelledSimple& s) {
  if (s.is_atom) return key(*s.atom);
  std::vector<std::string> w;
  for (const auto& a : s.wrap) w.push_back(key(a));
  std::sort(w.begin(), w.end());
  std::string out = "(";
  for (const auto& x : w) out += x + " ";
  return out + "| " + key(s.content) + ")";
}

inline std::string key(const std::vector<LabelledSimple>& t) {
  std::vector<std::string> parts;
  for (const auto& s : t) parts.push_back(key(s));
  std::sort(parts.begin(), parts.end());
  std::string out = "{";
  for (const auto& p : parts) out += p + ",";
  return out + "}";
}

inline std::string key(const std::vector<LabelledAtom>& wrap) {
  std::vector<std::string> w;
  for (const auto& a : wrap) w.push_back(key(a));
  std::sort(w.begin(), w.end());
  std::string out = "[";
  for (const auto& x : w) out += x + ",";
  return out + "]";
}

inline Term erase(const std::vector<LabelledSimple>& t);

inline SimpleTerm erase(const LabelledSimple& s) {
  if (s.is_atom) return SimpleTerm::atom(s.atom->atom);
  AtomBag wrap;
  for (const auto& a : s.wrap) wrap.add(a.atom);
  return SimpleTerm::compartment(std::move(wrap), erase(s.content));
}

inline Term erase(const std::vector<LabelledSimple>& t) {
  std::vector<SimpleTerm> raw;
  for (const auto& s : t) raw.push_back(erase(s));
  return Term::canonicalize(raw);
}

inline AtomBag erase(const std::vector<LabelledAtom>& wrap) {
  AtomBag b;
  for (const auto& a : wrap) b.add(a.atom);
  return b;
}

inline LabelledSimple expand(const SimpleTerm& s) {
  LabelledSimple out;
  if (s.is_atom()) {
    out.atom = LabelledAtom{s.as_atom(), 0};
    return out;
  }
  out.is_atom = false;
  const auto& c = s.as_compartment();
  for (const auto& e : c.wrap)
    for (std::uint64_t i = 0; i < e.count; ++i) out.wrap.push_back({e.value, 0});
  for (const auto& e : c.content.entries())
    for (std::uint64_t i = 0; i < e.count; ++i) out.content.push_back(expand(e.value));
  return out;
}

inline void collect_slots(LabelledTerm& t, std::map<std::string, std::vector<LabelledAtom*>>& slots) {
  for (auto& s : t) {
    if (s.is_atom) {
      slots[s.atom->atom.name()].push_back(&*s.atom);
    } else {
      for (auto& a : s.wrap) slots[a.atom.name()].push_back(&a);
      collect_slots(s.content, slots);
    }
  }
}

// A partial labelled instantiation: variable name -> (distinctness key, erased value).
struct Binding {
  std::map<std::string, std::string> keys;
  std::map<std::string, Term> terms;
  std::map<std::string, AtomBag> wraps;
};

class Embedder {
 public:
  Embedder(std::uint64_t cap, std::function<void(const Binding&)> sink) : cap_(cap), sink_(std::move(sink)) {}

  void run(const OpenTerm& lhs, const LabelledTerm& state) {
    Binding b;
    match_items(lhs, state, b, [&](Binding& done) {
      if (++count_ > cap_) throw OracleLimitExceeded("oracle embedding limit exceeded");
      sink_(done);
    });
  }

 private:
  using Cont = std::function<void(Binding&)>;

  // Matches every item of `pattern` against disjoint occurrences of `level`;
  // the single term variable (if any) takes the occurrences left over,
  // otherwise nothing may be left over.
  void match_items(const OpenTerm& pattern, const LabelledTerm& level, Binding& b, const Cont& k) {
    std::vector<const OpenSimple*> items;
    const Variable* residue = nullptr;
    for (const auto& s : pattern.items) {
      if (s.kind == OpenSimple::Kind::Variable) {
        residue = &s.variable;
      } else {
        items.push_back(&s);
      }
    }
    std::vector<bool> used(level.size(), false);
    place(items, 0, level, used, b, [&](Binding& bb) {
      LabelledTerm rest;
      for (std::size_t i = 0; i < level.size(); ++i)
        if (!used[i]) rest.push_back(level[i]);
      if (residue == nullptr) {
        if (rest.empty()) k(bb);
        return;
      }
      bb.keys[residue->name] = key(rest);
      bb.terms[residue->name] = erase(rest);
      k(bb);
      bb.keys.erase(residue->name);
      bb.terms.erase(residue->name);
    });
  }

  void place(const std::vector<const OpenSimple*>& items, std::size_t idx, const LabelledTerm& level,
             std::vector<bool>& used, Binding& b, const Cont& k) {
    if (idx == items.size()) {
      k(b);
      return;
    }
    const OpenSimple& item = *items[idx];
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (used[i]) continue;
      const auto& occ = level[i];
      if (item.kind == OpenSimple::Kind::Atom) {
        if (!occ.is_atom || occ.atom->atom != *item.atom) continue;
        used[i] = true;
        place(items, idx + 1, level, used, b, k);
        used[i] = false;
      } else {
        if (occ.is_atom) continue;
        used[i] = true;
        match_wrap(item, occ, 0, std::vector<bool>(occ.wrap.size(), false), b, [&](Binding& bw) {
          match_items(item.content, occ.content, bw,
                      [&](Binding& bc) { place(items, idx + 1, level, used, bc, k); });
        });
        used[i] = false;
      }
    }
  }

  void match_wrap(const OpenSimple& item, const LabelledSimple& occ, std::size_t idx, std::vector<bool> used,
                  Binding& b, const Cont& k) {
    if (idx == item.wrap_atoms.size()) {
      std::vector<LabelledAtom> rest;
      for (std::size_t i = 0; i < occ.wrap.size(); ++i)
        if (!used[i]) rest.push_back(occ.wrap[i]);
      if (item.wrap_vars.empty()) {
        if (rest.empty()) k(b);
        return;
      }
      const auto& name = item.wrap_vars.front().name;
      b.keys["~" + name] = key(rest);
      b.wraps[name] = erase(rest);
      k(b);
      b.keys.erase("~" + name);
      b.wraps.erase(name);
      return;
    }
    for (std::size_t i = 0; i < occ.wrap.size(); ++i) {
      if (used[i] || occ.wrap[i].atom != item.wrap_atoms[idx]) continue;
      used[i] = true;
      match_wrap(item, occ, idx + 1, used, b, k);
      used[i] = false;
    }
  }

  std::uint64_t cap_;
  std::uint64_t count_ = 0;
  std::function<void(const Binding&)> sink_;
};

}  // namespace oracle_detail

/// Gives every atom occurrence of `t` a label, distinct per support. With a
/// nonzero seed the labels are a random permutation instead of 1..n in order.
inline LabelledTerm label(const Term& t, std::uint64_t seed = 0) {
  LabelledTerm out;
  for (const auto& e : t.entries())
    for (std::uint64_t i = 0; i < e.count; ++i) out.push_back(oracle_detail::expand(e.value));
  std::map<std::string, std::vector<LabelledAtom*>> slots;
  oracle_detail::collect_slots(out, slots);
  std::mt19937_64 rng(seed);
  for (auto& [name, ptrs] : slots) {
    std::vector<std::uint64_t> labels(ptrs.size());
    std::iota(labels.begin(), labels.end(), 1);
    if (seed != 0) std::shuffle(labels.begin(), labels.end(), rng);
    for (std::size_t i = 0; i < ptrs.size(); ++i) ptrs[i]->label = labels[i];
  }
  return out;
}

/// For each outcome, the number of distinct completely-labelled
/// instantiations of the rule's left-hand side against `content`.
inline std::map<Term, std::uint64_t> oracle_outcomes(const Rule& rule, const Term& content,
                                                     std::uint64_t labelling_seed = 0,
                                                     const OracleLimits& limits = {}) {
  if (content.atom_total() > limits.max_atoms)
    throw OracleLimitExceeded("oracle input has " + std::to_string(content.atom_total()) + " atoms (limit " +
                              std::to_string(limits.max_atoms) + ")");
  if (content.depth() > limits.max_depth)
    throw OracleLimitExceeded("oracle input depth " + std::to_string(content.depth()) + " exceeds limit");

  const LabelledTerm labelled = label(content, labelling_seed);
  std::map<std::string, Term> distinct;  // serialized labelled instantiation -> erased outcome
  oracle_detail::Embedder embedder(limits.max_embeddings, [&](const oracle_detail::Binding& b) {
    std::string sig;
    for (const auto& [var, k] : b.keys) sig += var + "=" + k + ";";
    if (distinct.count(sig)) return;
    Substitution s;
    s.terms = b.terms;
    s.wraps = b.wraps;
    distinct.emplace(std::move(sig), apply_subst(rule.rhs, s));
  });
  embedder.run(rule.lhs_source, labelled);

  std::map<Term, std::uint64_t> out;
  for (const auto& [sig, outcome] : distinct) ++out[outcome];
  return out;
}

inline std::uint64_t count_oracle(const Rule& rule, const Term& content, const Term& outcome,
                                  std::uint64_t labelling_seed = 0, const OracleLimits& limits = {}) {
  auto all = oracle_outcomes(rule, content, labelling_seed, limits);
  auto it = all.find(outcome);
  return it == all.end() ? 0 : it->second;
}

}  // namespace cwc
