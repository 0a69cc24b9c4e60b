#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cwc/pattern.hpp"
#include "cwc/rates.hpp"
#include "cwc/term.hpp"

namespace cwc {

struct Diagnostic {
  SourceLoc loc;
  std::string kind;
  std::string message;
};

inline std::string to_string(const Diagnostic& d) {
  return std::to_string(d.loc.line) + ":" + std::to_string(d.loc.column) + ": error: [" + d.kind + "] " + d.message;
}

class ParseError : public Error {
 public:
  explicit ParseError(std::vector<Diagnostic> diagnostics)
      : Error(diagnostics.empty() ? "parse error" : to_string(diagnostics.front())),
        diagnostics_(std::move(diagnostics)) {}
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

struct Observable {
  std::string name;
  Atom atom;
  Scope scope;
};

struct Directives {
  std::optional<double> tmax;
  std::optional<double> sample;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> max_events;
  std::optional<std::uint64_t> replicates;
};

struct ModelFile {
  Term init;
  std::vector<Rule> rules;
  std::vector<Observable> observables;
  Directives directives;
};

struct ParseResult {
  std::optional<ModelFile> model;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return model.has_value(); }
};

namespace dsl_detail {

struct Token {
  enum class Kind {
    Ident, TermVar, WrapVar, Number, LParen, RParen, Bar, Star, Colon,
    Arrow, DArrow, At, Plus, Minus, Slash, End
  };
  Kind kind;
  std::string text;
  SourceLoc loc;
};

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
inline bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

inline std::vector<Token> lex(std::string_view src, std::vector<Diagnostic>& diags) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto read_ident = [&](std::size_t from) {
    std::size_t j = from;
    while (j < src.size() && ident_char(src[j])) ++j;
    return j;
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    SourceLoc loc{line, col};
    auto push = [&](Token::Kind k, std::size_t len) {
      out.push_back({k, std::string(src.substr(i, len)), loc});
      advance(len);
    };
    if (ident_start(c)) {
      std::size_t j = read_ident(i);
      if (src.substr(i, j - i) == "on" && src.substr(j, 5) == "-wrap" &&
          (j + 5 >= src.size() || !ident_char(src[j + 5]))) {
        j += 5;
      }
      push(Token::Kind::Ident, j - i);
      continue;
    }
    if ((c == '$' || c == '~') && i + 1 < src.size() && ident_start(src[i + 1])) {
      std::size_t j = read_ident(i + 1);
      out.push_back({c == '$' ? Token::Kind::TermVar : Token::Kind::WrapVar, std::string(src.substr(i + 1, j - i - 1)), loc});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      push(Token::Kind::Number, j - i);
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') { push(Token::Kind::Arrow, 2); continue; }
    if (c == '=' && i + 1 < src.size() && src[i + 1] == '>') { push(Token::Kind::DArrow, 2); continue; }
    switch (c) {
      case '(': push(Token::Kind::LParen, 1); continue;
      case ')': push(Token::Kind::RParen, 1); continue;
      case '|': push(Token::Kind::Bar, 1); continue;
      case '*': push(Token::Kind::Star, 1); continue;
      case ':': push(Token::Kind::Colon, 1); continue;
      case '@': push(Token::Kind::At, 1); continue;
      case '+': push(Token::Kind::Plus, 1); continue;
      case '-': push(Token::Kind::Minus, 1); continue;
      case '/': push(Token::Kind::Slash, 1); continue;
      default: break;
    }
    diags.push_back({loc, "syntax-error", std::string("unexpected character '") + c + "'"});
    advance(1);
  }
  out.push_back({Token::Kind::End, "", {line, col}});
  return out;
}

inline bool is_item_keyword(const std::string& s) {
  static const std::set<std::string> kw = {"init", "rule", "observe", "tmax", "seed", "sample", "maxevents", "replicates"};
  return kw.count(s) != 0;
}

inline bool is_reserved(const std::string& s) { return is_item_keyword(s) || s == "wrap" || s == "fn"; }

struct SyntaxError {
  Diagnostic diag;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<Diagnostic>& diags) : toks_(std::move(tokens)), diags_(diags) {}

  ModelFile parse_model(bool& ok) {
    ModelFile model;
    bool have_init = false;
    std::set<std::string> obs_names;
    std::set<std::string> rule_names;
    std::size_t rule_index = 0;
    while (peek().kind != Token::Kind::End) {
      const Token& head = peek();
      try {
        if (head.kind != Token::Kind::Ident || !is_item_keyword(head.text))
          fail(head, "expected 'init', 'rule', 'observe' or a directive, found '" + head.text + "'");
        next();
        if (head.text == "init") {
          OpenTerm o = open_term(true);
          if (!is_ground(o)) {
            std::vector<Variable> vs;
            collect_vars(o, vs);
            error(vs.front().loc, "syntax-error", "variables are not allowed in init");
          } else if (have_init) {
            error(head.loc, "syntax-error", "duplicate init declaration");
          } else {
            model.init = ground_term(o);
          }
          have_init = true;
        } else if (head.text == "rule") {
          ++rule_index;
          parse_rule(model, rule_index, rule_names, head.loc);
        } else if (head.text == "observe") {
          parse_observe(model, obs_names);
        } else {
          parse_directive(model.directives, head);
        }
      } catch (const SyntaxError& e) {
        diags_.push_back(e.diag);
        recover();
      }
    }
    if (!have_init) error(peek().loc, "syntax-error", "missing init declaration");
    ok = diags_.empty();
    return model;
  }

  OpenTerm standalone_term() {
    OpenTerm o = open_term(true);
    if (peek().kind != Token::Kind::End) fail(peek(), "unexpected '" + peek().text + "' after term");
    return o;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }

  [[noreturn]] void fail(const Token& at, std::string msg) { throw SyntaxError{{at.loc, "syntax-error", std::move(msg)}}; }
  void error(SourceLoc loc, std::string kind, std::string msg) { diags_.push_back({loc, std::move(kind), std::move(msg)}); }

  const Token& expect(Token::Kind k, const char* what) {
    if (peek().kind != k) fail(peek(), std::string("expected ") + what + ", found '" + peek().text + "'");
    return next();
  }

  void recover() {
    while (peek().kind != Token::Kind::End && !(peek().kind == Token::Kind::Ident && is_item_keyword(peek().text)))
      next();
  }

  bool at_term_end() const {
    const Token& t = peek();
    switch (t.kind) {
      case Token::Kind::End:
      case Token::Kind::RParen:
      case Token::Kind::Arrow:
      case Token::Kind::DArrow:
      case Token::Kind::At:
        return true;
      case Token::Kind::Ident: return is_reserved(t.text);
      default: return false;
    }
  }

  Atom atom_of(const Token& t) {
    if (is_reserved(t.text)) fail(t, "'" + t.text + "' is a reserved word and cannot name an atom");
    return Atom(t.text);
  }

  // openterm := "*" | (simple | TERMVAR)*
  OpenTerm open_term(bool allow_repeat) {
    OpenTerm o;
    if (peek().kind == Token::Kind::Star) {
      next();
      return o;
    }
    while (!at_term_end()) {
      const Token& t = peek();
      switch (t.kind) {
        case Token::Kind::Ident: {
          next();
          Atom a = atom_of(t);
          std::uint64_t copies = 1;
          if (peek().kind == Token::Kind::Star && peek(1).kind == Token::Kind::Number) {
            const Token& star = next();
            const Token& num = next();
            if (!allow_repeat) fail(star, "repetition 'atom*n' is only allowed in init");
            copies = parse_count(num);
          }
          for (std::uint64_t i = 0; i < copies; ++i) o.items.push_back(OpenSimple::make_atom(a, t.loc));
          break;
        }
        case Token::Kind::TermVar: next(); o.items.push_back(OpenSimple::make_variable({VarKind::Term, t.text, t.loc})); break;
        case Token::Kind::WrapVar: next(); o.items.push_back(OpenSimple::make_variable({VarKind::Wrap, t.text, t.loc})); break;
        case Token::Kind::LParen: o.items.push_back(compartment(allow_repeat)); break;
        case Token::Kind::Star: fail(t, "'*' denotes the empty term and must stand alone");
        default: fail(t, "unexpected '" + t.text + "' in term");
      }
    }
    return o;
  }

  // simple := "(" wrapside "|" openterm ")"
  OpenSimple compartment(bool allow_repeat) {
    const Token& open = expect(Token::Kind::LParen, "'('");
    std::vector<Atom> atoms;
    std::vector<Variable> vars;
    while (peek().kind != Token::Kind::Bar) {
      const Token& t = peek();
      if (t.kind == Token::Kind::Ident) {
        next();
        Atom a = atom_of(t);
        std::uint64_t copies = 1;
        if (peek().kind == Token::Kind::Star && peek(1).kind == Token::Kind::Number) {
          const Token& star = next();
          const Token& num = next();
          if (!allow_repeat) fail(star, "repetition 'atom*n' is only allowed in init");
          copies = parse_count(num);
        }
        for (std::uint64_t i = 0; i < copies; ++i) atoms.push_back(a);
      } else if (t.kind == Token::Kind::WrapVar) {
        next();
        vars.push_back({VarKind::Wrap, t.text, t.loc});
      } else if (t.kind == Token::Kind::TermVar) {
        next();
        vars.push_back({VarKind::Term, t.text, t.loc});
      } else {
        fail(t, "expected wrap atom, wrap variable or '|', found '" + t.text + "'");
      }
    }
    next();
    OpenTerm content = open_term(allow_repeat);
    expect(Token::Kind::RParen, "')'");
    return OpenSimple::make_compartment(std::move(atoms), std::move(vars), std::move(content), open.loc);
  }

  std::uint64_t parse_count(const Token& t) {
    std::uint64_t v = 0;
    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size()) fail(t, "expected a nonnegative integer");
    return v;
  }

  double parse_double(const Token& t) {
    double v = 0;
    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size()) fail(t, "malformed number '" + t.text + "'");
    return v;
  }

  std::vector<Atom> atom_list() {
    std::vector<Atom> out;
    if (peek().kind == Token::Kind::Star) {
      next();
      return out;
    }
    while (!at_term_end()) {
      const Token& t = peek();
      if (t.kind != Token::Kind::Ident) fail(t, "'wrap' rules take atoms only, found '" + t.text + "'");
      next();
      out.push_back(atom_of(t));
    }
    return out;
  }

  void parse_rule(ModelFile& model, std::size_t index, std::set<std::string>& names, SourceLoc rule_loc) {
    std::string id = std::to_string(index);
    if ((peek().kind == Token::Kind::Ident || peek().kind == Token::Kind::Number) &&
        peek(1).kind == Token::Kind::Colon && !(peek().kind == Token::Kind::Ident && peek().text == "wrap")) {
      id = next().text;
      next();
    } else if (peek().kind == Token::Kind::Colon) {
      next();
    }
    if (!names.insert(id).second) error(rule_loc, "syntax-error", "duplicate rule id '" + id + "'");

    OpenTerm lhs;
    OpenTerm rhs;
    if (peek().kind == Token::Kind::Ident && peek().text == "wrap") {
      const Token& w = next();
      auto from = atom_list();
      if (peek().kind != Token::Kind::Arrow && peek().kind != Token::Kind::DArrow) fail(peek(), "expected '->' or '=>'");
      next();
      auto to = atom_list();
      if (from.empty()) fail(w, "'wrap' rule needs at least one wrap atom on the left");
      // (a.. ~_x | $_Y) $_Z  ->  (b.. ~_x | $_Y) $_Z
      auto side = [&](std::vector<Atom> atoms) {
        OpenTerm content;
        content.items.push_back(OpenSimple::make_variable({VarKind::Term, "_Y", w.loc}));
        OpenTerm o;
        o.items.push_back(OpenSimple::make_compartment(std::move(atoms), {{VarKind::Wrap, "_x", w.loc}}, std::move(content), w.loc));
        o.items.push_back(OpenSimple::make_variable({VarKind::Term, "_Z", w.loc}));
        return o;
      };
      lhs = side(std::move(from));
      rhs = side(std::move(to));
    } else {
      lhs = open_term(false);
      const Token& arrow = peek();
      if (arrow.kind != Token::Kind::Arrow && arrow.kind != Token::Kind::DArrow) fail(arrow, "expected '->' or '=>', found '" + arrow.text + "'");
      next();
      rhs = open_term(false);
      if (arrow.kind == Token::Kind::DArrow) {
        lhs.items.push_back(OpenSimple::make_variable({VarKind::Term, "_W", arrow.loc}));
        rhs.items.push_back(OpenSimple::make_variable({VarKind::Term, "_W", arrow.loc}));
      }
    }
    expect(Token::Kind::At, "'@' and a rate");
    RateSpec rate = parse_rate();

    auto check = validate_rule(id, std::move(lhs), std::move(rhs), std::move(rate), rule_loc);
    for (const auto& e : check.errors) error(e.loc.line ? e.loc : rule_loc, to_string(e.kind), "rule " + id + ": " + e.message);
    if (check.rule) model.rules.push_back(std::move(*check.rule));
  }

  RateSpec parse_rate() {
    if (peek().kind == Token::Kind::Ident && peek().text == "fn") {
      next();
      expect(Token::Kind::LParen, "'(' after fn");
      RateExpr e = expr();
      expect(Token::Kind::RParen, "')' closing fn(");
      return FnRate{std::move(e)};
    }
    bool negative = false;
    if (peek().kind == Token::Kind::Minus) {
      next();
      negative = true;
    }
    const Token& num = expect(Token::Kind::Number, "a rate constant");
    double k = parse_double(num);
    return MassAction{negative ? -k : k};
  }

  // expr := term (("+" | "-") term)* ; term := factor (("*" | "/") factor)*
  RateExpr expr() {
    RateExpr lhs = term();
    while (peek().kind == Token::Kind::Plus || peek().kind == Token::Kind::Minus) {
      auto op = next().kind == Token::Kind::Plus ? RateExpr::Op::Add : RateExpr::Op::Sub;
      lhs = RateExpr::binary(op, std::move(lhs), term());
    }
    return lhs;
  }

  RateExpr term() {
    RateExpr lhs = factor();
    while (peek().kind == Token::Kind::Star || peek().kind == Token::Kind::Slash) {
      auto op = next().kind == Token::Kind::Star ? RateExpr::Op::Mul : RateExpr::Op::Div;
      lhs = RateExpr::binary(op, std::move(lhs), factor());
    }
    return lhs;
  }

  RateExpr factor() {
    const Token& t = peek();
    switch (t.kind) {
      case Token::Kind::Number: next(); return RateExpr::literal(parse_double(t));
      case Token::Kind::Minus: next(); return RateExpr::negate(factor());
      case Token::Kind::LParen: {
        next();
        RateExpr e = expr();
        expect(Token::Kind::RParen, "')'");
        return e;
      }
      case Token::Kind::Ident:
        if (t.text == "n") {
          next();
          return RateExpr::match_count();
        }
        if (t.text == "count_l" || t.text == "count_r") {
          next();
          expect(Token::Kind::LParen, "'('");
          const Token& a = expect(Token::Kind::Ident, "an atom");
          Atom atom = atom_of(a);
          expect(Token::Kind::RParen, "')'");
          return t.text == "count_l" ? RateExpr::count_left(atom) : RateExpr::count_right(atom);
        }
        fail(t, "unknown name '" + t.text + "' in rate expression");
      default: fail(t, "unexpected '" + t.text + "' in rate expression");
    }
  }

  void parse_observe(ModelFile& model, std::set<std::string>& names) {
    const Token& name = peek();
    if (name.kind != Token::Kind::Ident) fail(name, "expected observable name");
    next();
    expect(Token::Kind::Colon, "':'");
    const Token& at = expect(Token::Kind::Ident, "an atom");
    Atom atom = atom_of(at);
    const Token& in = expect(Token::Kind::Ident, "'in'");
    if (in.text != "in") fail(in, "expected 'in', found '" + in.text + "'");
    const Token& sc = expect(Token::Kind::Ident, "a scope (top, anywhere, inside, on-wrap)");
    Scope scope;
    if (sc.text == "top") {
      scope = Scope::top();
    } else if (sc.text == "anywhere") {
      scope = Scope::anywhere();
    } else if (sc.text == "inside") {
      const Token& m = expect(Token::Kind::Ident, "a marker atom after 'inside'");
      scope = Scope::inside(atom_of(m));
    } else if (sc.text == "on-wrap") {
      std::optional<Atom> marker;
      if (peek().kind == Token::Kind::Ident && !is_reserved(peek().text)) marker = atom_of(next());
      scope = Scope::on_wrap(marker);
    } else {
      fail(sc, "unknown scope '" + sc.text + "'");
    }
    if (!names.insert(name.text).second) {
      error(name.loc, "syntax-error", "duplicate observable '" + name.text + "'");
      return;
    }
    model.observables.push_back({name.text, atom, scope});
  }

  void parse_directive(Directives& d, const Token& head) {
    const Token& v = expect(Token::Kind::Number, "a number");
    if (head.text == "tmax") {
      d.tmax = parse_double(v);
      if (!(*d.tmax > 0)) error(v.loc, "syntax-error", "tmax must be positive");
    } else if (head.text == "sample") {
      d.sample = parse_double(v);
      if (!(*d.sample > 0)) error(v.loc, "syntax-error", "sample must be positive");
    } else if (head.text == "seed") {
      d.seed = parse_count(v);
    } else if (head.text == "maxevents") {
      d.max_events = parse_count(v);
    } else if (head.text == "replicates") {
      d.replicates = parse_count(v);
      if (*d.replicates == 0) error(v.loc, "syntax-error", "replicates must be positive");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<Diagnostic>& diags_;
};

}  // namespace dsl_detail

/// Parses and validates a model; on failure every diagnostic found is returned.
inline ParseResult parse_model(std::string_view text) {
  ParseResult result;
  auto tokens = dsl_detail::lex(text, result.diagnostics);
  dsl_detail::Parser parser(std::move(tokens), result.diagnostics);
  bool ok = false;
  ModelFile model = parser.parse_model(ok);
  if (ok && result.diagnostics.empty()) result.model = std::move(model);
  return result;
}

/// Parses a ground term such as `a b (c d | e f)`; `atom*n` repetition is accepted.
inline Term parse_term(std::string_view text) {
  std::vector<Diagnostic> diags;
  auto tokens = dsl_detail::lex(text, diags);
  dsl_detail::Parser parser(std::move(tokens), diags);
  OpenTerm o;
  try {
    o = parser.standalone_term();
  } catch (const dsl_detail::SyntaxError& e) {
    diags.push_back(e.diag);
  }
  if (diags.empty() && !is_ground(o)) diags.push_back({{1, 1}, "syntax-error", "term contains variables"});
  if (!diags.empty()) throw ParseError(std::move(diags));
  return ground_term(o);
}

inline std::string format_term(const Term& t) { return to_string(t); }

}  // namespace cwc
