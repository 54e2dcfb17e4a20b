#include "pbw/jet.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace pbw {

namespace {

std::vector<cplx> zeros(int order) {
  return std::vector<cplx>(static_cast<std::size_t>(order) + 1, cplx{});
}

// sinh and cosh share one recurrence: s' = c a', c' = s a'.
std::pair<Jet, Jet> sinh_cosh(const Jet& a) {
  const int n = a.order();
  auto s = zeros(n);
  auto c = zeros(n);
  s[0] = std::sinh(a[0]);
  c[0] = std::cosh(a[0]);
  for (int k = 1; k <= n; ++k) {
    cplx sk{}, ck{};
    for (int j = 1; j <= k; ++j) {
      const cplx ja = static_cast<double>(j) * a[j];
      sk += ja * c[static_cast<std::size_t>(k - j)];
      ck += ja * s[static_cast<std::size_t>(k - j)];
    }
    s[static_cast<std::size_t>(k)] = sk / static_cast<double>(k);
    c[static_cast<std::size_t>(k)] = ck / static_cast<double>(k);
  }
  return {Jet(a.base(), std::move(s)), Jet(a.base(), std::move(c))};
}

}  // namespace

Jet::Jet(double base, std::vector<cplx> coeffs) : base_(base), coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw std::invalid_argument("jet needs at least one coefficient");
}

Jet Jet::constant(double base, int order, cplx value) {
  auto c = zeros(order);
  c[0] = value;
  return Jet(base, std::move(c));
}

Jet Jet::variable(double base, int order) {
  auto c = zeros(order);
  c[0] = base;
  if (order >= 1) c[1] = 1.0;
  return Jet(base, std::move(c));
}

cplx Jet::derivative_value(int k) const {
  double factorial = 1.0;
  for (int j = 2; j <= k; ++j) factorial *= j;
  return (*this)[k] * factorial;
}

Jet Jet::truncated(int order) const {
  if (order > this->order()) {
    std::ostringstream msg;
    msg << "cannot raise jet order from " << this->order() << " to " << order;
    throw std::invalid_argument(msg.str());
  }
  return Jet(base_, std::vector<cplx>(coeffs_.begin(), coeffs_.begin() + order + 1));
}

Jet Jet::derivative() const {
  if (order() == 0) throw std::invalid_argument("derivative of an order-0 jet");
  auto d = zeros(order() - 1);
  for (int k = 1; k <= order(); ++k) d[static_cast<std::size_t>(k - 1)] = static_cast<double>(k) * (*this)[k];
  return Jet(base_, std::move(d));
}

Jet Jet::conj() const {
  auto c = coeffs_;
  for (auto& v : c) v = std::conj(v);
  return Jet(base_, std::move(c));
}

void Jet::require_compatible(const Jet& other, const char* op) const {
  if (base_ != other.base_ || order() != other.order()) {
    std::ostringstream msg;
    msg << "jet " << op << ": mismatched operands (base " << base_ << ", order " << order() << ") vs (base "
        << other.base_ << ", order " << other.order() << ")";
    throw std::invalid_argument(msg.str());
  }
}

Jet Jet::operator-() const {
  auto c = coeffs_;
  for (auto& v : c) v = -v;
  return Jet(base_, std::move(c));
}

Jet& Jet::operator+=(const Jet& other) {
  require_compatible(other, "add");
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += other.coeffs_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& other) {
  require_compatible(other, "sub");
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= other.coeffs_[k];
  return *this;
}

Jet& Jet::operator*=(const Jet& other) {
  require_compatible(other, "mul");
  const int n = order();
  auto c = zeros(n);
  for (int k = 0; k <= n; ++k) {
    cplx sum{};
    for (int j = 0; j <= k; ++j) sum += (*this)[j] * other[k - j];
    c[static_cast<std::size_t>(k)] = sum;
  }
  coeffs_ = std::move(c);
  return *this;
}

Jet& Jet::operator/=(const Jet& other) {
  require_compatible(other, "div");
  if (other[0] == cplx{}) throw DomainError("jet division by a jet with zero constant term");
  const int n = order();
  auto c = zeros(n);
  for (int k = 0; k <= n; ++k) {
    cplx sum = (*this)[k];
    for (int j = 1; j <= k; ++j) sum -= other[j] * c[static_cast<std::size_t>(k - j)];
    c[static_cast<std::size_t>(k)] = sum / other[0];
  }
  coeffs_ = std::move(c);
  return *this;
}

Jet& Jet::operator*=(cplx s) {
  for (auto& v : coeffs_) v *= s;
  return *this;
}

Jet& Jet::operator+=(cplx s) {
  coeffs_[0] += s;
  return *this;
}

Jet exp(const Jet& a) {
  const int n = a.order();
  auto b = zeros(n);
  b[0] = std::exp(a[0]);
  for (int k = 1; k <= n; ++k) {
    cplx sum{};
    for (int j = 1; j <= k; ++j) sum += static_cast<double>(j) * a[j] * b[static_cast<std::size_t>(k - j)];
    b[static_cast<std::size_t>(k)] = sum / static_cast<double>(k);
  }
  return Jet(a.base(), std::move(b));
}

Jet sinh(const Jet& a) { return sinh_cosh(a).first; }

Jet cosh(const Jet& a) { return sinh_cosh(a).second; }

Jet tanh(const Jet& a) {
  auto [s, c] = sinh_cosh(a);
  return s / c;
}

Jet sqrt(const Jet& a) {
  const cplx a0 = a[0];
  if (a0 == cplx{}) throw DomainError("sqrt of a jet with zero constant term");
  if (a0.imag() == 0.0 && a0.real() < 0.0) throw DomainError("sqrt of a jet with negative real constant term");
  const int n = a.order();
  auto b = zeros(n);
  b[0] = std::sqrt(a0);
  for (int k = 1; k <= n; ++k) {
    cplx sum = a[k];
    for (int j = 1; j < k; ++j) sum -= b[static_cast<std::size_t>(j)] * b[static_cast<std::size_t>(k - j)];
    b[static_cast<std::size_t>(k)] = sum / (2.0 * b[0]);
  }
  return Jet(a.base(), std::move(b));
}

Jet pow(const Jet& a, int k) {
  if (k < 0) return Jet::constant(a.base(), a.order(), 1.0) / pow(a, -k);
  Jet result = Jet::constant(a.base(), a.order(), 1.0);
  Jet square = a;
  while (k > 0) {
    if (k & 1) result *= square;
    k >>= 1;
    if (k > 0) square *= square;
  }
  return result;
}

Jet hermite(int n, const Jet& a) {
  if (n < 0) throw std::invalid_argument("negative Hermite degree");
  Jet prev = Jet::constant(a.base(), a.order(), 1.0);
  if (n == 0) return prev;
  const Jet two_y = 2.0 * a;
  Jet cur = two_y;
  for (int k = 1; k < n; ++k) {
    Jet next = two_y * cur - (2.0 * k) * prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

Jet jet_binary(BinaryOp kind, const Jet& a, const Jet& b) {
  switch (kind) {
    case BinaryOp::add: return a + b;
    case BinaryOp::sub: return a - b;
    case BinaryOp::mul: return a * b;
    case BinaryOp::div: return a / b;
  }
  throw std::invalid_argument("unknown binary op");
}

Jet jet_compose(Outer outer, const Jet& a, int param) {
  switch (outer) {
    case Outer::exp: return exp(a);
    case Outer::sinh: return sinh(a);
    case Outer::cosh: return cosh(a);
    case Outer::tanh: return tanh(a);
    case Outer::sqrt: return sqrt(a);
    case Outer::pow_k: return pow(a, param);
    case Outer::hermite_n: return hermite(param, a);
  }
  throw std::invalid_argument("unknown outer function");
}

}  // namespace pbw
