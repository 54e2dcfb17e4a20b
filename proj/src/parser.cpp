#include <cctype>
#include <charconv>
#include <cstdlib>
#include <string>

#include "pbw/expr.hpp"

namespace pbw {

namespace {

class Parser {
 public:
  Parser(std::string_view src, const AntiderivRegistry* registry) : src_(src), registry_(registry) {}

  Expr parse() {
    Expr e = expression();
    skip_space();
    if (pos_ < src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { fail_at(message, pos_); }

  [[noreturn]] void fail_at(const std::string& message, std::size_t at) const {
    int line = 1, column = 1;
    for (std::size_t i = 0; i < at && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(message, line, column);
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  char peek() {
    skip_space();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' but input ended");
      fail(std::string("expected '") + c + "'");
    }
  }

  Expr expression() {
    Expr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = lhs + term();
      else if (accept('-'))
        lhs = lhs - term();
      else
        return lhs;
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = lhs * unary();
      else if (accept('/'))
        lhs = lhs / unary();
      else
        return lhs;
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    return factor();
  }

  Expr factor() {
    Expr b = base();
    if (accept('^')) {
      const bool negative = accept('-');
      skip_space();
      const std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (start == pos_) fail("expected integer exponent");
      int k = 0;
      auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, k);
      if (ec != std::errc{}) fail_at("exponent out of range", start);
      b = Expr::pow(b, negative ? -k : k);
    }
    return b;
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) fail_at("malformed number '" + text + "'", start);
    return Expr::constant(v);
  }

  Expr base() {
    const char c = peek();
    if (c == '\0') fail("unexpected end of input");
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (accept('(')) {
      Expr e = expression();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      const std::string name(src_.substr(start, pos_ - start));
      if (name == "x") return Expr::x();
      if (name == "i") return Expr::constant(cplx(0.0, 1.0));
      ExprKind kind;
      if (name == "exp")
        kind = ExprKind::exp;
      else if (name == "sinh")
        kind = ExprKind::sinh;
      else if (name == "cosh")
        kind = ExprKind::cosh;
      else if (name == "tanh")
        kind = ExprKind::tanh;
      else if (name == "sqrt")
        kind = ExprKind::sqrt;
      else if (name == "antideriv")
        kind = ExprKind::antideriv;
      else
        fail_at("unknown identifier '" + name + "'", start);
      expect('(');
      Expr arg = expression();
      expect(')');
      if (kind == ExprKind::antideriv) {
        std::optional<Expr> closed;
        if (registry_) {
          auto it = registry_->find(to_string(arg));
          if (it != registry_->end()) closed = it->second;
        }
        return Expr::antideriv(arg, closed);
      }
      return Expr::unary(kind, arg);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view src_;
  const AntiderivRegistry* registry_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view src, const AntiderivRegistry* registry) {
  return Parser(src, registry).parse();
}

}  // namespace pbw
