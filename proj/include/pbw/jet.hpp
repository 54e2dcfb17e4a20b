#pragma once

#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pbw {

using cplx = std::complex<double>;

/// Default ceiling on jet order. Level-n states need jets of order n plus
/// whatever derivatives the caller asks for on top.
inline constexpr int kDefaultMaxOrder = 40;

/// Raised when a function is evaluated outside its domain (pole, zero
/// denominator, branch point).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Truncated Taylor expansion f(x+h) = sum_k c_k h^k, k = 0..order, with
/// complex coefficients c_k = f^(k)(x)/k!.
class Jet {
 public:
  Jet(double base, std::vector<cplx> coeffs);

  static Jet constant(double base, int order, cplx value);
  /// The identity function seeded at base: (base, 1, 0, ...).
  static Jet variable(double base, int order);
  static Jet zero(double base, int order) { return constant(base, order, 0.0); }

  double base() const { return base_; }
  int order() const { return static_cast<int>(coeffs_.size()) - 1; }
  std::span<const cplx> coeffs() const { return coeffs_; }
  cplx operator[](int k) const { return coeffs_[static_cast<std::size_t>(k)]; }
  cplx value() const { return coeffs_.front(); }
  /// k-th derivative at the base point, k! * c_k.
  cplx derivative_value(int k) const;

  Jet truncated(int order) const;
  /// Jet of f', one order lower.
  Jet derivative() const;
  Jet conj() const;

  Jet operator-() const;
  Jet& operator+=(const Jet& other);
  Jet& operator-=(const Jet& other);
  Jet& operator*=(const Jet& other);
  Jet& operator/=(const Jet& other);
  Jet& operator*=(cplx s);
  Jet& operator+=(cplx s);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, const Jet& b) { return a *= b; }
  friend Jet operator/(Jet a, const Jet& b) { return a /= b; }
  friend Jet operator*(Jet a, cplx s) { return a *= s; }
  friend Jet operator*(cplx s, Jet a) { return a *= s; }
  friend Jet operator+(Jet a, cplx s) { return a += s; }
  friend Jet operator+(cplx s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, cplx s) { return a += -s; }
  friend Jet operator-(cplx s, const Jet& a) { return -a + s; }

 private:
  void require_compatible(const Jet& other, const char* op) const;

  double base_;
  std::vector<cplx> coeffs_;
};

Jet exp(const Jet& a);
Jet sinh(const Jet& a);
Jet cosh(const Jet& a);
Jet tanh(const Jet& a);
/// Principal square root. Throws DomainError for a zero constant term
/// and for a real, negative one.
Jet sqrt(const Jet& a);
Jet pow(const Jet& a, int k);
/// Physicists' Hermite polynomial H_n composed with a, through the
/// three-term recurrence.
Jet hermite(int n, const Jet& a);

enum class BinaryOp { add, sub, mul, div };
Jet jet_binary(BinaryOp kind, const Jet& a, const Jet& b);

enum class Outer { exp, sinh, cosh, tanh, sqrt, pow_k, hermite_n };
/// `param` is the exponent for pow_k and the degree for hermite_n.
Jet jet_compose(Outer outer, const Jet& a, int param = 0);

/// A function that can be expanded to any order at any real point.
using JetFunction = std::function<Jet(double x, int order)>;

/// Plain values of a jet function (order 0).
inline cplx value_at(const JetFunction& f, double x) { return f(x, 0).value(); }

}  // namespace pbw
