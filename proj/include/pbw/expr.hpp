#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pbw/jet.hpp"

namespace pbw {

enum class ExprKind { var, constant, add, sub, mul, div, neg, pow, exp, sinh, cosh, tanh, sqrt, antideriv };

/// Immutable expression tree in the variable x.
///
/// `antideriv(e)` stands for the antiderivative of e that vanishes at 0.
/// It is evaluated by quadrature unless a closed form has been attached.
class Expr {
 public:
  struct Node;

  /// The variable x.
  static Expr x();
  static Expr constant(cplx value);
  static Expr pow(const Expr& base, int exponent);
  static Expr unary(ExprKind kind, const Expr& arg);
  static Expr binary(ExprKind kind, const Expr& lhs, const Expr& rhs);
  /// Antiderivative node; `closed_form` must vanish at 0 if given.
  static Expr antideriv(const Expr& integrand, std::optional<Expr> closed_form = std::nullopt);

  ExprKind kind() const;
  /// Literal value; only valid for constant nodes.
  cplx value() const;
  int exponent() const;
  const std::vector<Expr>& children() const;
  const std::optional<Expr>& closed_form() const;
  bool is_constant() const { return kind() == ExprKind::constant; }

  Expr operator-() const;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr exp(const Expr& a);
Expr sinh(const Expr& a);
Expr cosh(const Expr& a);
Expr tanh(const Expr& a);
Expr sqrt(const Expr& a);
inline Expr constant(cplx v) { return Expr::constant(v); }

/// Text form accepted back by parse_expr. Closed forms attached to
/// antideriv nodes are not printed.
std::string to_string(const Expr& e);

/// Same shape and same literals. Attached closed forms are ignored.
bool structurally_equal(const Expr& a, const Expr& b);

/// Exact Taylor coefficients of e at x up to `order`. Throws DomainError
/// naming the offending sub-expression.
Jet jet_lift(const Expr& e, double x, int order);

inline cplx evaluate(const Expr& e, double x) { return jet_lift(e, x, 0).value(); }

JetFunction as_jet_function(const Expr& e);

/// Closed-form antiderivatives keyed by the printed integrand.
using AntiderivRegistry = std::map<std::string, Expr>;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Grammar (whitespace insensitive):
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := '-' unary | factor
///   factor := base ('^' '-'? integer)?
///   base   := number | 'x' | 'i' | func '(' expr ')' | '(' expr ')'
///   func   := exp | sinh | cosh | tanh | sqrt | antideriv
/// Constant sub-trees are folded to a single literal.
Expr parse_expr(std::string_view src, const AntiderivRegistry* registry = nullptr);

}  // namespace pbw
