#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "cwc/term.hpp"

namespace cwc {

/// Shortest round-trip decimal form, independent of the C locale.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class RateError : public Error {
 public:
  enum class Kind { NonFinite, Negative, DivisionByZero };
  RateError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline const char* to_string(RateError::Kind k) {
  switch (k) {
    case RateError::Kind::NonFinite: return "nonfinite-rate";
    case RateError::Kind::Negative: return "negative-rate";
    case RateError::Kind::DivisionByZero: return "division-by-zero";
  }
  return "rate-error";
}

/// Arithmetic over literals, the match count `n`, and top-level atom counts
/// of the matched content (`count_l`) and of the outcome (`count_r`).
class RateExpr {
 public:
  enum class Op { Literal, MatchCount, CountLeft, CountRight, Add, Sub, Mul, Div, Neg };

  static RateExpr literal(double v) { return RateExpr(Op::Literal, v); }
  static RateExpr match_count() { return RateExpr(Op::MatchCount, 0.0); }
  static RateExpr count_left(Atom a) { return RateExpr(Op::CountLeft, a); }
  static RateExpr count_right(Atom a) { return RateExpr(Op::CountRight, a); }
  static RateExpr binary(Op op, RateExpr lhs, RateExpr rhs) {
    RateExpr e(op, 0.0);
    e.lhs_ = std::make_shared<RateExpr>(std::move(lhs));
    e.rhs_ = std::make_shared<RateExpr>(std::move(rhs));
    return e;
  }
  static RateExpr negate(RateExpr operand) {
    RateExpr e(Op::Neg, 0.0);
    e.lhs_ = std::make_shared<RateExpr>(std::move(operand));
    return e;
  }

  Op op() const { return op_; }

  double evaluate(const Term& matched, const Term& outcome, std::uint64_t n) const {
    switch (op_) {
      case Op::Literal: return value_;
      case Op::MatchCount: return static_cast<double>(n);
      case Op::CountLeft: return static_cast<double>(matched.count(SimpleTerm::atom(*atom_)));
      case Op::CountRight: return static_cast<double>(outcome.count(SimpleTerm::atom(*atom_)));
      case Op::Neg: return -lhs_->evaluate(matched, outcome, n);
      default: break;
    }
    double a = lhs_->evaluate(matched, outcome, n);
    double b = rhs_->evaluate(matched, outcome, n);
    switch (op_) {
      case Op::Add: return a + b;
      case Op::Sub: return a - b;
      case Op::Mul: return a * b;
      case Op::Div:
        if (b == 0.0) throw RateError(RateError::Kind::DivisionByZero, "division by zero in rate expression");
        return a / b;
      default: return 0.0;
    }
  }

  std::string to_string() const {
    switch (op_) {
      case Op::Literal: return format_number(value_);
      case Op::MatchCount: return "n";
      case Op::CountLeft: return "count_l(" + atom_->name() + ")";
      case Op::CountRight: return "count_r(" + atom_->name() + ")";
      case Op::Neg: return "-(" + lhs_->to_string() + ")";
      case Op::Add: return "(" + lhs_->to_string() + " + " + rhs_->to_string() + ")";
      case Op::Sub: return "(" + lhs_->to_string() + " - " + rhs_->to_string() + ")";
      case Op::Mul: return "(" + lhs_->to_string() + " * " + rhs_->to_string() + ")";
      case Op::Div: return "(" + lhs_->to_string() + " / " + rhs_->to_string() + ")";
    }
    return "?";
  }

 private:
  RateExpr(Op op, double v) : op_(op), value_(v) {}
  RateExpr(Op op, Atom a) : op_(op), atom_(a) {}

  Op op_;
  double value_ = 0.0;
  std::optional<Atom> atom_;
  std::shared_ptr<const RateExpr> lhs_;
  std::shared_ptr<const RateExpr> rhs_;
};

struct MassAction {
  double k = 0.0;
};

struct FnRate {
  RateExpr expr;
};

using RateSpec = std::variant<MassAction, FnRate>;

/// Propensity of one (context, outcome) pair: k*n for mass action, the
/// expression value otherwise.
inline double rate_of(const RateSpec& spec, const Term& matched, const Term& outcome, std::uint64_t n) {
  double r = 0.0;
  if (const auto* ma = std::get_if<MassAction>(&spec)) {
    r = ma->k * static_cast<double>(n);
  } else {
    r = std::get<FnRate>(spec).expr.evaluate(matched, outcome, n);
  }
  if (!std::isfinite(r)) throw RateError(RateError::Kind::NonFinite, "rate evaluated to a non-finite value");
  if (r < 0.0) throw RateError(RateError::Kind::Negative, "rate evaluated to a negative value");
  return r;
}

inline std::string to_string(const RateSpec& spec) {
  if (const auto* ma = std::get_if<MassAction>(&spec)) return format_number(ma->k);
  return "fn(" + std::get<FnRate>(spec).expr.to_string() + ")";
}

}  // namespace cwc
