#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cwc/rates.hpp"
#include "cwc/term.hpp"

namespace cwc {

struct SourceLoc {
  int line = 0;
  int column = 0;
};

enum class VarKind { Term, Wrap };

/// A variable; `$X` (term variable) and `~x` (wrap variable) live in disjoint
/// namespaces. The source location does not take part in comparisons.
struct Variable {
  VarKind kind = VarKind::Term;
  std::string name;
  SourceLoc loc{};

  friend bool operator==(const Variable& a, const Variable& b) { return a.kind == b.kind && a.name == b.name; }
  friend bool operator<(const Variable& a, const Variable& b) {
    return std::tie(a.kind, a.name) < std::tie(b.kind, b.name);
  }
};

inline std::string to_string(const Variable& v) { return (v.kind == VarKind::Term ? "$" : "~") + v.name; }

struct OpenSimple;

/// An open term exactly as written: an unordered list of simple open terms.
/// Variables may sit in the wrong position here; validation reports it.
struct OpenTerm {
  std::vector<OpenSimple> items;
};

struct OpenSimple {
  enum class Kind { Atom, Variable, Compartment };

  Kind kind = Kind::Atom;
  std::optional<Atom> atom;
  Variable variable;
  std::vector<Atom> wrap_atoms;
  std::vector<Variable> wrap_vars;
  OpenTerm content;
  SourceLoc loc{};

  static OpenSimple make_atom(Atom a, SourceLoc loc = {}) {
    OpenSimple s;
    s.kind = Kind::Atom;
    s.atom = a;
    s.loc = loc;
    return s;
  }
  static OpenSimple make_variable(Variable v) {
    OpenSimple s;
    s.kind = Kind::Variable;
    s.loc = v.loc;
    s.variable = std::move(v);
    return s;
  }
  static OpenSimple make_compartment(std::vector<Atom> wrap_atoms, std::vector<Variable> wrap_vars, OpenTerm content,
                                     SourceLoc loc = {}) {
    OpenSimple s;
    s.kind = Kind::Compartment;
    s.wrap_atoms = std::move(wrap_atoms);
    s.wrap_vars = std::move(wrap_vars);
    s.content = std::move(content);
    s.loc = loc;
    return s;
  }
};

inline void collect_vars(const OpenTerm& o, std::vector<Variable>& out) {
  for (const auto& s : o.items) {
    switch (s.kind) {
      case OpenSimple::Kind::Atom: break;
      case OpenSimple::Kind::Variable: out.push_back(s.variable); break;
      case OpenSimple::Kind::Compartment:
        for (const auto& v : s.wrap_vars) out.push_back(v);
        collect_vars(s.content, out);
        break;
    }
  }
}

inline std::set<Variable> vars_of(const OpenTerm& o) {
  std::vector<Variable> all;
  collect_vars(o, all);
  return {all.begin(), all.end()};
}

inline bool is_ground(const OpenTerm& o) {
  std::vector<Variable> all;
  collect_vars(o, all);
  return all.empty();
}

inline std::string to_string(const OpenTerm& o);

inline std::string to_string(const OpenSimple& s) {
  switch (s.kind) {
    case OpenSimple::Kind::Atom: return s.atom->name();
    case OpenSimple::Kind::Variable: return to_string(s.variable);
    case OpenSimple::Kind::Compartment: {
      std::string out = "(";
      for (auto a : s.wrap_atoms) out += a.name() + " ";
      for (const auto& v : s.wrap_vars) out += to_string(v) + " ";
      return out + "| " + to_string(s.content) + ")";
    }
  }
  return "?";
}

inline std::string to_string(const OpenTerm& o) {
  if (o.items.empty()) return "*";
  std::string out;
  for (const auto& s : o.items) {
    if (!out.empty()) out += ' ';
    out += to_string(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Substitutions.

struct Substitution {
  std::map<std::string, Term> terms;
  std::map<std::string, AtomBag> wraps;

  friend bool operator==(const Substitution&, const Substitution&) = default;
};

class SubstitutionError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void instantiate_into(const OpenTerm& o, const Substitution& s, std::vector<Term::Entry>& out) {
  for (const auto& item : o.items) {
    switch (item.kind) {
      case OpenSimple::Kind::Atom: out.push_back({SimpleTerm::atom(*item.atom), 1}); break;
      case OpenSimple::Kind::Variable: {
        if (item.variable.kind != VarKind::Term)
          throw SubstitutionError("wrap variable " + to_string(item.variable) + " in content position");
        auto it = s.terms.find(item.variable.name);
        if (it == s.terms.end()) throw SubstitutionError("unbound variable " + to_string(item.variable));
        for (const auto& e : it->second.entries()) out.push_back(e);
        break;
      }
      case OpenSimple::Kind::Compartment: {
        AtomBag wrap;
        for (auto a : item.wrap_atoms) wrap.add(a);
        for (const auto& v : item.wrap_vars) {
          if (v.kind != VarKind::Wrap) throw SubstitutionError("term variable " + to_string(v) + " in wrap position");
          auto it = s.wraps.find(v.name);
          if (it == s.wraps.end()) throw SubstitutionError("unbound variable " + to_string(v));
          wrap = wrap.plus(it->second);
        }
        std::vector<Term::Entry> inner;
        instantiate_into(item.content, s, inner);
        out.push_back({SimpleTerm::compartment(std::move(wrap), Term(Multiset<SimpleTerm>::from_unsorted(std::move(inner)))), 1});
        break;
      }
    }
  }
}

}  // namespace detail

/// Replaces every variable of `o` by its value in `s`; the result is canonical.
inline Term apply_subst(const OpenTerm& o, const Substitution& s) {
  std::vector<Term::Entry> entries;
  detail::instantiate_into(o, s, entries);
  return Term(Multiset<SimpleTerm>::from_unsorted(std::move(entries)));
}

/// The ground term denoted by a variable-free open term.
inline Term ground_term(const OpenTerm& o) { return apply_subst(o, Substitution{}); }

// ---------------------------------------------------------------------------
// Validated patterns.

struct CompartmentPattern;

/// One level of a pattern: ground parts matched as an exact submultiset,
/// compartment patterns, and the residue variable taking the remainder.
struct PatternLevel {
  Term ground;
  std::vector<CompartmentPattern> compartments;
  std::string residue;
};

struct CompartmentPattern {
  AtomBag wrap_atoms;
  std::string wrap_var;
  PatternLevel content;
};

struct Pattern {
  PatternLevel top;
};

struct Rule {
  std::string id;
  OpenTerm lhs_source;
  Pattern lhs;
  OpenTerm rhs;
  RateSpec rate;
};

struct PatternDiagnostic {
  enum class Kind { NonlinearPattern, UnboundVariable, MalformedPattern, KindMismatch, InvalidRate };
  Kind kind;
  std::string message;
  SourceLoc loc{};
};

inline const char* to_string(PatternDiagnostic::Kind k) {
  switch (k) {
    case PatternDiagnostic::Kind::NonlinearPattern: return "nonlinear-pattern";
    case PatternDiagnostic::Kind::UnboundVariable: return "unbound-variable";
    case PatternDiagnostic::Kind::MalformedPattern: return "malformed-pattern";
    case PatternDiagnostic::Kind::KindMismatch: return "kind-mismatch";
    case PatternDiagnostic::Kind::InvalidRate: return "invalid-rate";
  }
  return "pattern-error";
}

struct RuleCheck {
  std::optional<Rule> rule;
  std::vector<PatternDiagnostic> errors;

  bool ok() const { return rule.has_value(); }
};

namespace detail {

inline void check_kinds(const OpenTerm& o, std::vector<PatternDiagnostic>& errors) {
  for (const auto& s : o.items) {
    if (s.kind == OpenSimple::Kind::Variable && s.variable.kind != VarKind::Term) {
      errors.push_back({PatternDiagnostic::Kind::KindMismatch,
                        "wrap variable " + to_string(s.variable) + " used in a content position", s.variable.loc});
    } else if (s.kind == OpenSimple::Kind::Compartment) {
      for (const auto& v : s.wrap_vars) {
        if (v.kind != VarKind::Wrap)
          errors.push_back({PatternDiagnostic::Kind::KindMismatch,
                            "term variable " + to_string(v) + " used in a wrap position", v.loc});
      }
      check_kinds(s.content, errors);
    }
  }
}

inline std::optional<PatternLevel> compile_level(const OpenTerm& o, bool top, SourceLoc where,
                                                 std::vector<PatternDiagnostic>& errors) {
  PatternLevel level;
  std::vector<Term::Entry> ground;
  std::vector<const Variable*> residues;
  bool ok = true;
  for (const auto& s : o.items) {
    switch (s.kind) {
      case OpenSimple::Kind::Atom: ground.push_back({SimpleTerm::atom(*s.atom), 1}); break;
      case OpenSimple::Kind::Variable:
        if (s.variable.kind == VarKind::Term) residues.push_back(&s.variable);
        break;
      case OpenSimple::Kind::Compartment: {
        if (is_ground(s.content) && s.wrap_vars.empty()) {
          ground.push_back({ground_term(OpenTerm{{s}}).entries().front().value, 1});
          break;
        }
        CompartmentPattern cp;
        for (auto a : s.wrap_atoms) cp.wrap_atoms.add(a);
        std::size_t wrap_vars = 0;
        for (const auto& v : s.wrap_vars) {
          if (v.kind == VarKind::Wrap) {
            cp.wrap_var = v.name;
            ++wrap_vars;
          }
        }
        if (wrap_vars != 1) {
          errors.push_back({PatternDiagnostic::Kind::MalformedPattern,
                            "compartment pattern needs exactly one wrap variable, found " + std::to_string(wrap_vars),
                            s.loc});
          ok = false;
        }
        auto inner = compile_level(s.content, false, s.loc, errors);
        if (!inner) {
          ok = false;
        } else {
          cp.content = std::move(*inner);
        }
        level.compartments.push_back(std::move(cp));
        break;
      }
    }
  }
  if (residues.size() != 1) {
    errors.push_back({PatternDiagnostic::Kind::MalformedPattern,
                      std::string(top ? "pattern" : "compartment pattern") +
                          " needs exactly one residue term variable, found " + std::to_string(residues.size()),
                      residues.size() > 1 ? residues[1]->loc : where});
    ok = false;
  } else {
    level.residue = residues.front()->name;
  }
  level.ground = Term(Multiset<SimpleTerm>::from_unsorted(std::move(ground)));
  if (top && level.ground.empty() && level.compartments.empty()) {
    errors.push_back({PatternDiagnostic::Kind::MalformedPattern, "pattern has no reactants", where});
    ok = false;
  }
  if (!ok) return std::nullopt;
  return level;
}

}  // namespace detail

/// Checks a parsed rule against the pattern grammar, linearity and variable
/// binding; every violation is reported.
inline RuleCheck validate_rule(std::string id, OpenTerm lhs, OpenTerm rhs, RateSpec rate, SourceLoc where = {}) {
  RuleCheck check;
  auto& errors = check.errors;
  detail::check_kinds(lhs, errors);
  detail::check_kinds(rhs, errors);

  std::vector<Variable> lhs_vars;
  collect_vars(lhs, lhs_vars);
  std::set<Variable> seen;
  for (const auto& v : lhs_vars) {
    if (!seen.insert(v).second)
      errors.push_back({PatternDiagnostic::Kind::NonlinearPattern,
                        "variable " + to_string(v) + " occurs more than once in the left-hand side", v.loc});
  }

  std::vector<Variable> rhs_vars;
  collect_vars(rhs, rhs_vars);
  std::set<Variable> reported;
  for (const auto& v : rhs_vars) {
    if (!seen.count(v) && reported.insert(v).second)
      errors.push_back({PatternDiagnostic::Kind::UnboundVariable,
                        "variable " + to_string(v) + " is not bound by the left-hand side", v.loc});
  }

  if (const auto* ma = std::get_if<MassAction>(&rate); ma && !(ma->k >= 0.0 && std::isfinite(ma->k))) {
    errors.push_back({PatternDiagnostic::Kind::InvalidRate, "kinetic constant must be finite and >= 0", where});
  }

  auto compiled = detail::compile_level(lhs, true, where, errors);
  if (errors.empty() && compiled) {
    check.rule = Rule{std::move(id), std::move(lhs), Pattern{std::move(*compiled)}, std::move(rhs), std::move(rate)};
  }
  return check;
}

}  // namespace cwc
