#include "pbw/expr.hpp"

#include <cstdio>
#include <sstream>

#include "pbw/integrate.hpp"

namespace pbw {

struct Expr::Node {
  ExprKind kind;
  cplx value{};
  int exponent = 0;
  std::vector<Expr> children;
  std::optional<Expr> closed_form;
};

namespace {

bool is_function(ExprKind k) {
  return k == ExprKind::exp || k == ExprKind::sinh || k == ExprKind::cosh || k == ExprKind::tanh ||
         k == ExprKind::sqrt || k == ExprKind::antideriv;
}

const char* function_name(ExprKind k) {
  switch (k) {
    case ExprKind::exp: return "exp";
    case ExprKind::sinh: return "sinh";
    case ExprKind::cosh: return "cosh";
    case ExprKind::tanh: return "tanh";
    case ExprKind::sqrt: return "sqrt";
    case ExprKind::antideriv: return "antideriv";
    default: return "?";
  }
}

char operator_symbol(ExprKind k) {
  switch (k) {
    case ExprKind::add: return '+';
    case ExprKind::sub: return '-';
    case ExprKind::mul: return '*';
    case ExprKind::div: return '/';
    default: return '?';
  }
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_constant(cplx v) {
  if (v.imag() == 0.0) {
    if (v.real() < 0.0 || std::signbit(v.real())) return "(" + format_real(v.real()) + ")";
    return format_real(v.real());
  }
  std::string s = "(" + format_real(v.real());
  s += v.imag() < 0.0 ? "-" : "+";
  s += format_real(std::abs(v.imag())) + "*i)";
  return s;
}

cplx fold(ExprKind kind, cplx a, cplx b) {
  switch (kind) {
    case ExprKind::add: return a + b;
    case ExprKind::sub: return a - b;
    case ExprKind::mul: return a * b;
    default: return a / b;
  }
}

Jet lift(const Expr& e, double x, int order);

[[noreturn]] void domain_failure(const Expr& e, double x, const std::string& why) {
  std::ostringstream msg;
  msg << why << " in '" << to_string(e) << "' at x = " << x;
  throw DomainError(msg.str());
}

Jet lift(const Expr& e, double x, int order) {
  const auto& ch = e.children();
  switch (e.kind()) {
    case ExprKind::var: return Jet::variable(x, order);
    case ExprKind::constant: return Jet::constant(x, order, e.value());
    case ExprKind::add: return lift(ch[0], x, order) + lift(ch[1], x, order);
    case ExprKind::sub: return lift(ch[0], x, order) - lift(ch[1], x, order);
    case ExprKind::mul: return lift(ch[0], x, order) * lift(ch[1], x, order);
    case ExprKind::div: {
      Jet den = lift(ch[1], x, order);
      if (den.value() == cplx{}) domain_failure(e, x, "division by zero");
      return lift(ch[0], x, order) / den;
    }
    case ExprKind::neg: return -lift(ch[0], x, order);
    case ExprKind::pow: {
      Jet base = lift(ch[0], x, order);
      if (e.exponent() < 0 && base.value() == cplx{}) domain_failure(e, x, "negative power of zero");
      return pbw::pow(base, e.exponent());
    }
    case ExprKind::exp: return pbw::exp(lift(ch[0], x, order));
    case ExprKind::sinh: return pbw::sinh(lift(ch[0], x, order));
    case ExprKind::cosh: return pbw::cosh(lift(ch[0], x, order));
    case ExprKind::tanh: {
      Jet arg = lift(ch[0], x, order);
      Jet c = pbw::cosh(arg);
      if (c.value() == cplx{}) domain_failure(e, x, "tanh pole");
      return pbw::sinh(arg) / c;
    }
    case ExprKind::sqrt: {
      try {
        return pbw::sqrt(lift(ch[0], x, order));
      } catch (const DomainError&) {
        domain_failure(e, x, "square root branch point");
      }
    }
    case ExprKind::antideriv: {
      if (e.closed_form()) return lift(*e.closed_form(), x, order);
      const Expr integrand = ch[0];
      return quad::antiderivative_jet([&](double t, int k) { return lift(integrand, t, k); }, x, order);
    }
  }
  throw std::logic_error("unhandled expression kind");
}

}  // namespace

Expr Expr::x() { return Expr(std::make_shared<const Node>(Node{ExprKind::var, {}, 0, {}, std::nullopt})); }

Expr Expr::constant(cplx value) {
  return Expr(std::make_shared<const Node>(Node{ExprKind::constant, value, 0, {}, std::nullopt}));
}

Expr Expr::pow(const Expr& base, int exponent) {
  if (base.is_constant()) {
    cplx v = 1.0;
    for (int k = 0; k < std::abs(exponent); ++k) v *= base.value();
    return constant(exponent < 0 ? 1.0 / v : v);
  }
  return Expr(std::make_shared<const Node>(Node{ExprKind::pow, {}, exponent, {base}, std::nullopt}));
}

Expr Expr::unary(ExprKind kind, const Expr& arg) {
  if (kind == ExprKind::neg && arg.is_constant()) return constant(-arg.value());
  if (kind != ExprKind::neg && !is_function(kind)) throw std::invalid_argument("not a unary expression kind");
  if (kind == ExprKind::antideriv) return antideriv(arg);
  if (arg.is_constant()) {
    const cplx v = arg.value();
    switch (kind) {
      case ExprKind::exp: return constant(std::exp(v));
      case ExprKind::sinh: return constant(std::sinh(v));
      case ExprKind::cosh: return constant(std::cosh(v));
      case ExprKind::tanh:
        if (std::cosh(v) != cplx{}) return constant(std::tanh(v));
        break;
      case ExprKind::sqrt:
        // branch points stay symbolic so evaluation reports them
        if (!(v.imag() == 0.0 && v.real() <= 0.0)) return constant(std::sqrt(v));
        break;
      default: break;
    }
  }
  return Expr(std::make_shared<const Node>(Node{kind, {}, 0, {arg}, std::nullopt}));
}

Expr Expr::binary(ExprKind kind, const Expr& lhs, const Expr& rhs) {
  if (operator_symbol(kind) == '?') throw std::invalid_argument("not a binary expression kind");
  if (lhs.is_constant() && rhs.is_constant()) return constant(fold(kind, lhs.value(), rhs.value()));
  return Expr(std::make_shared<const Node>(Node{kind, {}, 0, {lhs, rhs}, std::nullopt}));
}

Expr Expr::antideriv(const Expr& integrand, std::optional<Expr> closed_form) {
  return Expr(
      std::make_shared<const Node>(Node{ExprKind::antideriv, {}, 0, {integrand}, std::move(closed_form)}));
}

ExprKind Expr::kind() const { return node_->kind; }
cplx Expr::value() const { return node_->value; }
int Expr::exponent() const { return node_->exponent; }
const std::vector<Expr>& Expr::children() const { return node_->children; }
const std::optional<Expr>& Expr::closed_form() const { return node_->closed_form; }

Expr Expr::operator-() const { return unary(ExprKind::neg, *this); }

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(ExprKind::add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(ExprKind::sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(ExprKind::mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(ExprKind::div, a, b); }
Expr exp(const Expr& a) { return Expr::unary(ExprKind::exp, a); }
Expr sinh(const Expr& a) { return Expr::unary(ExprKind::sinh, a); }
Expr cosh(const Expr& a) { return Expr::unary(ExprKind::cosh, a); }
Expr tanh(const Expr& a) { return Expr::unary(ExprKind::tanh, a); }
Expr sqrt(const Expr& a) { return Expr::unary(ExprKind::sqrt, a); }

std::string to_string(const Expr& e) {
  const auto& ch = e.children();
  switch (e.kind()) {
    case ExprKind::var: return "x";
    case ExprKind::constant: return format_constant(e.value());
    case ExprKind::add:
    case ExprKind::sub:
    case ExprKind::mul:
    case ExprKind::div:
      return "(" + to_string(ch[0]) + " " + operator_symbol(e.kind()) + " " + to_string(ch[1]) + ")";
    case ExprKind::neg: return "(-" + to_string(ch[0]) + ")";
    case ExprKind::pow: return "(" + to_string(ch[0]) + ")^" + std::to_string(e.exponent());
    default: return std::string(function_name(e.kind())) + "(" + to_string(ch[0]) + ")";
  }
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind() != b.kind()) return false;
  if (a.kind() == ExprKind::constant) return a.value() == b.value();
  if (a.kind() == ExprKind::pow && a.exponent() != b.exponent()) return false;
  const auto& ca = a.children();
  const auto& cb = b.children();
  if (ca.size() != cb.size()) return false;
  for (std::size_t i = 0; i < ca.size(); ++i)
    if (!structurally_equal(ca[i], cb[i])) return false;
  return true;
}

Jet jet_lift(const Expr& e, double x, int order) {
  if (order < 0) throw std::invalid_argument("negative jet order");
  return lift(e, x, order);
}

JetFunction as_jet_function(const Expr& e) {
  return [e](double x, int order) { return jet_lift(e, x, order); };
}

ParseError::ParseError(const std::string& message, int line, int column)
    : std::runtime_error(message + " at " + std::to_string(line) + ":" + std::to_string(column)),
      line_(line),
      column_(column) {}

}  // namespace pbw
