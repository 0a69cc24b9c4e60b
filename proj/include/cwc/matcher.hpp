#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cwc/pattern.hpp"
#include "cwc/term.hpp"

namespace cwc {

class CountOverflow : public Error {
 public:
  using Error::Error;
};

namespace detail {
__extension__ typedef unsigned __int128 u128;  // exact intermediate products
}  // namespace detail

inline std::uint64_t binomial(std::uint64_t m, std::uint64_t k) {
  if (k > m) return 0;
  k = std::min(k, m - k);
  detail::u128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (m - k + i) / i;
    if (r > UINT64_MAX) throw CountOverflow("binomial coefficient overflows 64 bits");
  }
  return static_cast<std::uint64_t>(r);
}

inline std::uint64_t falling_factorial(std::uint64_t m, std::uint64_t k) {
  if (k > m) return 0;
  detail::u128 r = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    r *= (m - i);
    if (r > UINT64_MAX) throw CountOverflow("falling factorial overflows 64 bits");
  }
  return static_cast<std::uint64_t>(r);
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  detail::u128 r = static_cast<detail::u128>(a) * b;
  if (r > UINT64_MAX) throw CountOverflow("match count overflows 64 bits");
  return static_cast<std::uint64_t>(r);
}

/// One instantiation of a pattern level, up to congruence of the bound values,
/// together with the number of labelled instantiations that erase to it.
struct LevelMatch {
  Substitution subst;
  std::uint64_t count = 0;
  bool labelled = false;  // some bound value contains an atom
};

namespace detail {

std::vector<LevelMatch> match_level(const PatternLevel& level, const Term& content);

inline std::vector<LevelMatch> match_compartment(const CompartmentPattern& cp, const Compartment& c) {
  std::vector<LevelMatch> out;
  if (!c.wrap.contains(cp.wrap_atoms)) return out;
  AtomBag rest = c.wrap.minus(cp.wrap_atoms);
  std::uint64_t wrap_ways = 1;
  for (const auto& e : cp.wrap_atoms) wrap_ways = checked_mul(wrap_ways, binomial(c.wrap.count(e.value), e.count));
  for (auto& m : match_level(cp.content, c.content)) {
    m.subst.wraps.emplace(cp.wrap_var, rest);
    m.count = checked_mul(m.count, wrap_ways);
    m.labelled = m.labelled || !rest.empty();
    out.push_back(std::move(m));
  }
  return out;
}

struct Candidate {
  std::size_t element;  // index into the remaining content
  const LevelMatch* inner;
};

inline std::vector<LevelMatch> match_level(const PatternLevel& level, const Term& content) {
  std::vector<LevelMatch> out;
  if (!content.contains(level.ground)) return out;
  const Term remaining = content.minus(level.ground);

  const std::size_t r = level.compartments.size();
  // inner[j][i]: matches of compartment pattern j against remaining entry i.
  std::vector<std::vector<std::vector<LevelMatch>>> inner(r);
  for (std::size_t j = 0; j < r; ++j) {
    inner[j].resize(remaining.distinct());
    bool any = false;
    for (std::size_t i = 0; i < remaining.distinct(); ++i) {
      const auto& e = remaining[i];
      if (e.value.is_atom()) continue;
      inner[j][i] = match_compartment(level.compartments[j], e.value.as_compartment());
      any = any || !inner[j][i].empty();
    }
    if (!any) return out;
  }

  std::vector<Candidate> chosen(r);
  std::vector<std::uint64_t> used(remaining.distinct(), 0);

  auto emit = [&]() {
    // Residue: what the compartment patterns leave of the remaining content.
    auto rest = remaining.elements();
    std::vector<std::uint64_t> labelled_per(remaining.distinct(), 0);
    LevelMatch m;
    m.count = 1;
    for (std::size_t j = 0; j < r; ++j) {
      rest.remove(remaining[chosen[j].element].value, 1);
      const auto& in = *chosen[j].inner;
      for (const auto& [k, v] : in.subst.terms) m.subst.terms.emplace(k, v);
      for (const auto& [k, v] : in.subst.wraps) m.subst.wraps.emplace(k, v);
      m.count = checked_mul(m.count, in.count);
      if (in.labelled) {
        ++labelled_per[chosen[j].element];
        m.labelled = true;
      }
    }
    Term residue(std::move(rest));
    m.labelled = m.labelled || residue.atom_total() > 0;
    m.subst.terms.emplace(level.residue, std::move(residue));

    // Which copies are consumed, and which consumed copy feeds each
    // compartment pattern whose bound values carry labels.
    for (std::size_t i = 0; i < content.distinct(); ++i) {
      const auto& e = content[i];
      std::uint64_t consumed = level.ground.count(e.value);
      std::uint64_t labelled = 0;
      if (auto ri = remaining.elements().find(e.value)) {
        consumed += used[*ri];
        labelled = labelled_per[*ri];
      }
      if (consumed == 0) continue;
      if (e.value.is_atom()) {
        m.count = checked_mul(m.count, binomial(e.count, consumed));
      } else if (e.value.as_compartment().atom_bearing()) {
        m.count = checked_mul(m.count, binomial(e.count, consumed));
        m.count = checked_mul(m.count, falling_factorial(consumed, labelled));
      }
    }
    out.push_back(std::move(m));
  };

  auto assign = [&](auto& self, std::size_t j) -> void {
    if (j == r) {
      emit();
      return;
    }
    for (std::size_t i = 0; i < remaining.distinct(); ++i) {
      if (inner[j][i].empty() || used[i] >= remaining[i].count) continue;
      ++used[i];
      for (const auto& m : inner[j][i]) {
        chosen[j] = Candidate{i, &m};
        self(self, j + 1);
      }
      --used[i];
    }
  };
  assign(assign, 0);
  return out;
}

}  // namespace detail

/// Contexts of a state: the top level plus one representative per compartment
/// class, transitively. `multiplicity` counts distinguishable copies.
struct Context {
  Path path;
  std::uint64_t multiplicity = 1;
};

namespace detail {
inline void collect_contexts(const Term& t, const Path& here, std::uint64_t mult, std::vector<Context>& out) {
  out.push_back({here, mult});
  for (std::size_t i = 0; i < t.distinct(); ++i) {
    const auto& e = t[i];
    if (e.value.is_atom()) continue;
    const auto& c = e.value.as_compartment();
    collect_contexts(c.content, here.child(i, 0), c.atom_bearing() ? mult * e.count : mult, out);
  }
}
}  // namespace detail

inline std::vector<Context> enumerate_contexts(const Term& state) {
  std::vector<Context> out;
  detail::collect_contexts(state, Path{}, 1, out);
  return out;
}

struct Match {
  std::string rule_id;
  Path path;
  Substitution subst;
  Term outcome_local;
  std::uint64_t labelled_count = 0;  // labelled instantiations erasing to `subst`
};

/// All instantiations (up to congruence of values) of the rule's left-hand side
/// against the content at `p`.
inline std::vector<Match> match_at(const Rule& rule, const Term& state, const Path& p) {
  std::vector<Match> out;
  for (auto& lm : detail::match_level(rule.lhs.top, resolve(state, p))) {
    Term outcome = apply_subst(rule.rhs, lm.subst);
    out.push_back(Match{rule.id, p, std::move(lm.subst), std::move(outcome), lm.count});
  }
  return out;
}

struct LocalOutcome {
  Term outcome;
  std::uint64_t n = 0;
};

/// Matches of `rule` against `content`, grouped by produced content; `n` is
/// the number of distinct completely-labelled instantiations for that outcome.
inline std::vector<LocalOutcome> local_outcomes(const Rule& rule, const Term& content) {
  std::map<Term, std::uint64_t> grouped;
  for (auto& lm : detail::match_level(rule.lhs.top, content)) {
    Term outcome = apply_subst(rule.rhs, lm.subst);
#ifdef CWC_FAULT_INJECT_COUNT
    lm.count += 1;
#endif
    auto& slot = grouped[std::move(outcome)];
    slot += lm.count;
  }
  std::vector<LocalOutcome> out;
  out.reserve(grouped.size());
  for (auto& [t, n] : grouped) out.push_back({t, n});
  return out;
}

inline std::vector<LocalOutcome> outcomes(const Rule& rule, const Term& state, const Path& p) {
  return local_outcomes(rule, resolve(state, p));
}

}  // namespace cwc
