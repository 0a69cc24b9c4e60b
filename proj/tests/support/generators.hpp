#pragma once

// Random terms and rules for property tests. Small alphabets on purpose, so
// that congruent compartments and repeated atoms show up often.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cwc/cwc.hpp"

namespace cwc::testing {

using Rng64 = std::mt19937_64;

inline std::size_t pick(Rng64& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
inline bool coin(Rng64& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

struct StateBounds {
  std::uint64_t max_atoms = 12;
  std::uint32_t max_depth = 3;
  std::uint32_t max_compartments = 3;
};

namespace gen_detail {

inline const std::vector<std::string>& content_atoms() {
  static const std::vector<std::string> v{"a", "b", "c"};
  return v;
}
inline const std::vector<std::string>& wrap_atoms() {
  static const std::vector<std::string> v{"a", "b", "m"};
  return v;
}

struct Budget {
  std::uint64_t atoms;
  std::uint32_t compartments;
};

inline std::vector<SimpleTerm> random_level(Rng64& rng, Budget& b, std::uint32_t depth_left) {
  std::vector<SimpleTerm> out;
  std::size_t atoms = b.atoms == 0 ? 0 : pick(rng, std::min<std::uint64_t>(b.atoms, 5) + 1);
  for (std::size_t i = 0; i < atoms; ++i) out.push_back(SimpleTerm::atom(Atom(content_atoms()[pick(rng, 3)])));
  b.atoms -= atoms;
  std::size_t comps = depth_left == 0 || b.compartments == 0 ? 0 : pick(rng, std::min<std::uint32_t>(b.compartments, 2) + 1);
  for (std::size_t i = 0; i < comps && b.compartments > 0; ++i) {
    --b.compartments;
    std::vector<Atom> wrap;
    std::size_t w = b.atoms == 0 ? 0 : pick(rng, std::min<std::uint64_t>(b.atoms, 2) + 1);
    for (std::size_t k = 0; k < w; ++k) wrap.push_back(Atom(wrap_atoms()[pick(rng, 3)]));
    b.atoms -= w;
    AtomBag bag;
    for (auto a : wrap) bag.add(a);
    auto content = Term::canonicalize(random_level(rng, b, depth_left - 1));
    auto c = SimpleTerm::compartment(std::move(bag), std::move(content));
    out.push_back(c);
    // Sometimes duplicate a compartment to exercise congruent copies.
    if (coin(rng, 0.3) && b.atoms >= c.as_compartment().wrap.total() + c.as_compartment().content.atom_total() &&
        b.compartments > 0) {
      b.atoms -= c.as_compartment().wrap.total() + c.as_compartment().content.atom_total();
      --b.compartments;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace gen_detail

/// Random canonical state within the given bounds (atoms counted on wraps too).
inline Term random_state(Rng64& rng, const StateBounds& bounds = {}) {
  gen_detail::Budget b{bounds.max_atoms, bounds.max_compartments};
  return Term::canonicalize(gen_detail::random_level(rng, b, bounds.max_depth));
}

/// The same term rebuilt from a shuffled element list at every level.
inline Term reshuffle(const Term& t, Rng64& rng) {
  std::vector<SimpleTerm> raw;
  for (const auto& e : t.entries()) {
    for (std::uint64_t i = 0; i < e.count; ++i) {
      if (e.value.is_atom()) {
        raw.push_back(e.value);
      } else {
        const auto& c = e.value.as_compartment();
        std::vector<Atom> wrap;
        for (const auto& w : c.wrap)
          for (std::uint64_t k = 0; k < w.count; ++k) wrap.push_back(w.value);
        std::shuffle(wrap.begin(), wrap.end(), rng);
        AtomBag bag;
        for (auto a : wrap) bag.add(a);
        raw.push_back(SimpleTerm::compartment(std::move(bag), reshuffle(c.content, rng)));
      }
    }
  }
  std::shuffle(raw.begin(), raw.end(), rng);
  return Term::canonicalize(raw);
}

/// Writes the term with every level in a random order, as model text.
inline std::string shuffled_text(const Term& t, Rng64& rng) {
  std::vector<std::string> parts;
  for (const auto& e : t.entries()) {
    for (std::uint64_t i = 0; i < e.count; ++i) {
      if (e.value.is_atom()) {
        parts.push_back(e.value.as_atom().name());
        continue;
      }
      const auto& c = e.value.as_compartment();
      std::vector<std::string> wrap;
      for (const auto& w : c.wrap)
        for (std::uint64_t k = 0; k < w.count; ++k) wrap.push_back(w.value.name());
      std::shuffle(wrap.begin(), wrap.end(), rng);
      std::string s = "(";
      for (const auto& w : wrap) s += w + " ";
      s += "| " + shuffled_text(c.content, rng) + ")";
      parts.push_back(s);
    }
  }
  if (parts.empty()) return "*";
  std::shuffle(parts.begin(), parts.end(), rng);
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : " ") + p;
  return out;
}

namespace gen_detail {

struct RuleBuilder {
  explicit RuleBuilder(Rng64& r) : rng(r) {}

  Rng64& rng;
  int next_var = 0;
  std::vector<std::string> term_vars;
  std::vector<std::string> wrap_vars;

  std::string atoms(std::size_t max, const std::vector<std::string>& alphabet) {
    std::string s;
    std::size_t n = pick(rng, max + 1);
    for (std::size_t i = 0; i < n; ++i) s += alphabet[pick(rng, alphabet.size())] + " ";
    return s;
  }

  std::string level(std::uint32_t depth_left, bool top) {
    std::string s = atoms(top ? 3 : 2, content_atoms());
    std::size_t comps = depth_left == 0 ? 0 : pick(rng, top ? 3 : 2);
    for (std::size_t i = 0; i < comps; ++i) {
      if (coin(rng, 0.15)) {
        // A ground compartment, which must match exactly.
        s += "(" + atoms(1, wrap_atoms()) + "| " + atoms(1, content_atoms()) + ") ";
        continue;
      }
      std::string w = "w" + std::to_string(next_var++);
      wrap_vars.push_back(w);
      s += "(" + atoms(1, wrap_atoms()) + "~" + w + " | " + level(depth_left - 1, false) + ") ";
    }
    if (top && s.empty()) s = content_atoms()[pick(rng, 3)] + " ";
    std::string r = "X" + std::to_string(next_var++);
    term_vars.push_back(r);
    return s + "$" + r;
  }

  std::string rhs() {
    std::string s = atoms(2, content_atoms());
    std::vector<std::string> tv, wv;
    for (const auto& v : term_vars)
      if (coin(rng, 0.8)) tv.push_back(v);
    for (const auto& v : wrap_vars)
      if (coin(rng, 0.8)) wv.push_back(v);
    std::shuffle(tv.begin(), tv.end(), rng);
    if (!wv.empty() || coin(rng, 0.3)) {
      s += "(";
      for (const auto& w : wv) s += "~" + w + " ";
      s += "| ";
      std::size_t inside = tv.empty() ? 0 : pick(rng, tv.size() + 1);
      for (std::size_t i = 0; i < inside; ++i) s += "$" + tv[i] + " ";
      s += ") ";
      tv.erase(tv.begin(), tv.begin() + static_cast<std::ptrdiff_t>(inside));
    }
    for (const auto& v : tv) s += "$" + v + " ";
    return s.empty() ? "*" : s;
  }
};

}  // namespace gen_detail

/// Text of a random valid rule `lhs -> rhs @ 1` with a full-form left-hand side.
inline std::string random_rule_text(Rng64& rng, const std::string& id = "r") {
  gen_detail::RuleBuilder b(rng);
  std::string lhs = b.level(2, true);
  std::string rhs = b.rhs();
  return "rule " + id + ": " + lhs + " -> " + rhs + " @ 1";
}

namespace gen_detail {

// Left-hand side carved out of an actual level of a state, so it tends to
// match, often in several ways.
struct CarvedBuilder : RuleBuilder {
  using RuleBuilder::RuleBuilder;

  std::string carve(const Term& level, bool top) {
    std::string s;
    std::size_t compartments_taken = 0;
    for (const auto& e : level.entries()) {
      if (e.value.is_atom()) {
        std::size_t k = pick(rng, std::min<std::uint64_t>(e.count, 3) + 1);
        for (std::size_t i = 0; i < k; ++i) s += e.value.as_atom().name() + " ";
        continue;
      }
      std::size_t k = compartments_taken >= 2 ? 0 : pick(rng, std::min<std::uint64_t>(e.count, 2) + 1);
      for (std::size_t i = 0; i < k; ++i, ++compartments_taken) {
        const auto& c = e.value.as_compartment();
        if (coin(rng, 0.15)) {
          s += "(" + (c.wrap.empty() ? std::string() : to_string(c.wrap)) + " | " + to_string(c.content) + ") ";
          continue;
        }
        std::string wrap;
        for (const auto& w : c.wrap) {
          std::size_t take = pick(rng, w.count + 1);
          for (std::size_t j = 0; j < take; ++j) wrap += w.value.name() + " ";
        }
        std::string w = "w" + std::to_string(next_var++);
        wrap_vars.push_back(w);
        s += "(" + wrap + "~" + w + " | " + carve(c.content, false) + ") ";
      }
    }
    if (top && s.empty()) s = content_atoms()[pick(rng, 3)] + " ";
    std::string r = "X" + std::to_string(next_var++);
    term_vars.push_back(r);
    return s + "$" + r;
  }
};

}  // namespace gen_detail

/// Like random_rule_text, but the left-hand side is cut from one context of
/// `state`, so that it usually matches there.
inline std::string carved_rule_text(Rng64& rng, const Term& state, const std::string& id = "r") {
  auto contexts = enumerate_contexts(state);
  const Term& level = resolve(state, contexts[pick(rng, contexts.size())].path);
  gen_detail::CarvedBuilder b(rng);
  std::string lhs = b.carve(level, true);
  std::string rhs = b.rhs();
  return "rule " + id + ": " + lhs + " -> " + rhs + " @ 1";
}

/// Parses a model that must be valid; throws with the diagnostics otherwise.
inline ModelFile must_parse(const std::string& text) {
  auto r = parse_model(text);
  if (!r.ok()) {
    std::string msg = "model failed to parse:\n" + text + "\n";
    for (const auto& d : r.diagnostics) msg += to_string(d) + "\n";
    throw Error(msg);
  }
  return std::move(*r.model);
}

inline Rule random_rule(Rng64& rng) { return must_parse("init *\n" + random_rule_text(rng)).rules.front(); }

/// A random rule for `state`: carved from it half of the time, free otherwise.
inline Rule random_rule_for(Rng64& rng, const Term& state) {
  std::string text = coin(rng) ? carved_rule_text(rng, state) : random_rule_text(rng);
  return must_parse("init *\n" + text).rules.front();
}

}  // namespace cwc::testing
