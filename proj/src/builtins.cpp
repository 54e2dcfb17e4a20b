#include <cmath>
#include <numbers>
#include <sstream>

#include "pbw/model.hpp"

namespace pbw {

namespace {

const Expr kX = Expr::x();

Expr c(cplx v) { return Expr::constant(v); }

// conj(psi_0) phi_0 = exp(-(x^2 + 2 k x) / (2 alpha_a alpha_b)) for every
// constant-alpha model built here, so <psi_0, phi_0> is a Gaussian integral.
cplx constant_alpha_norm(cplx alpha_a, cplx alpha_b, cplx k) {
  const cplx prod = alpha_a * alpha_b;
  if ((1.0 / prod).real() <= 0.0)
    throw std::invalid_argument("constant-alpha vacua are not compatible unless Re(1/(alpha_a alpha_b)) > 0");
  const cplx integral = std::sqrt(2.0 * std::numbers::pi * prod) * std::exp(k * k / (2.0 * prod));
  return 1.0 / integral;
}

cplx param(std::span<const cplx> params, std::size_t i, cplx fallback) {
  return i < params.size() ? params[i] : fallback;
}

}  // namespace

PBModel bosonic() {
  const double r = 1.0 / std::numbers::sqrt2;
  PBModel m;
  m.name = "bosonic";
  m.alpha_a = c(r);
  m.alpha_b = c(r);
  m.beta_a = c(r) * kX;
  m.beta_b = c(r) * kX;
  m.flavor = Flavor::constant_alpha;
  m.constant = ConstantAlpha{r, r, 0.0};
  m.phi0_exponent = c(-0.5) * Expr::pow(kX, 2);
  m.psi0_shape = exp(c(-0.5) * Expr::pow(kX, 2));
  m.norm_product = constant_alpha_norm(r, r, 0.0);
  return m;
}

PBModel shifted(cplx alpha, cplx beta) {
  const double r = 1.0 / std::numbers::sqrt2;
  PBModel m;
  m.name = "shifted";
  m.alpha_a = c(r);
  m.alpha_b = c(r);
  m.beta_a = c(r) * kX + c(alpha);
  m.beta_b = c(r) * kX + c(beta);
  m.flavor = Flavor::constant_alpha;
  const cplx k = (alpha + beta) * r;
  m.constant = ConstantAlpha{r, r, k};
  m.phi0_exponent = c(-0.5) * Expr::pow(kX, 2) - c(std::numbers::sqrt2 * alpha) * kX;
  m.psi0_shape = exp(c(-0.5) * Expr::pow(kX, 2) - c(std::numbers::sqrt2 * std::conj(beta)) * kX);
  m.norm_product = constant_alpha_norm(r, r, k);
  return m;
}

PBModel swanson(double theta) {
  const double r = 1.0 / std::numbers::sqrt2;
  const cplx phase = std::polar(1.0, theta);
  PBModel m;
  m.name = "swanson";
  m.alpha_a = c(std::conj(phase) * r);
  m.alpha_b = c(std::conj(phase) * r);
  m.beta_a = c(phase * r) * kX;
  m.beta_b = c(phase * r) * kX;
  m.flavor = Flavor::constant_alpha;
  m.constant = ConstantAlpha{std::conj(phase) * r, std::conj(phase) * r, 0.0};
  m.phi0_exponent = c(-0.5 * phase * phase) * Expr::pow(kX, 2);
  m.psi0_shape = exp(c(-0.5 * std::conj(phase * phase)) * Expr::pow(kX, 2));
  m.norm_product = constant_alpha_norm(m.constant->alpha_a, m.constant->alpha_b, 0.0);
  return m;
}

PBModel constant_alpha(cplx alpha_a, cplx alpha_b, cplx k) {
  if (alpha_a * alpha_b == cplx{}) throw std::invalid_argument("constant_alpha needs alpha_a * alpha_b != 0");
  PBModel m;
  m.name = "constant_alpha";
  m.alpha_a = c(alpha_a);
  m.alpha_b = c(alpha_b);
  m.beta_a = kX / c(alpha_b);
  m.beta_b = c(k / alpha_a);
  m.flavor = Flavor::constant_alpha;
  m.constant = ConstantAlpha{alpha_a, alpha_b, k};
  m.phi0_exponent = c(-1.0 / (2.0 * alpha_a * alpha_b)) * Expr::pow(kX, 2);
  m.psi0_shape = exp(c(-std::conj(k / (alpha_a * alpha_b))) * kX);
  m.norm_product = constant_alpha_norm(alpha_a, alpha_b, k);
  return m;
}

PBModel example1() {
  const Expr one_plus_x2 = c(1.0) + Expr::pow(kX, 2);
  const Expr alpha = c(1.0) / one_plus_x2;
  const Expr rho = kX + Expr::pow(kX, 3) / c(3.0);
  PBModel m;
  m.name = "example1";
  m.alpha_a = alpha;
  m.alpha_b = alpha;
  m.beta_a = Expr::antideriv(c(1.0) / alpha, rho);
  m.beta_b = c(-2.0) * kX / Expr::pow(one_plus_x2, 2);
  m.flavor = Flavor::equal_alpha;
  m.rho = m.beta_a;
  // Real root of x + x^3/3 = r.
  m.rho_inverse_closed = [](double r) {
    const double s = r / std::numbers::sqrt2;
    const double u = -3.0 * std::numbers::sqrt2 * s + std::numbers::sqrt2 * std::sqrt(2.0 + 9.0 * s * s);
    return std::cbrt(2.0 / u) - std::cbrt(u / 2.0);
  };
  m.phi0_exponent = c(-0.5) * Expr::pow(rho, 2);
  m.psi0_shape = one_plus_x2;
  m.norm_product = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return m;
}

PBModel example2() {
  PBModel m;
  m.name = "example2";
  m.alpha_a = c(1.0) / cosh(kX);
  m.alpha_b = c(1.0) / (c(2.0) * cosh(kX));
  m.beta_a = c(2.0) * sinh(kX);
  m.beta_b = -sinh(kX) / (c(2.0) * Expr::pow(cosh(kX), 2));
  m.flavor = Flavor::sech_pair;
  m.rho = m.beta_a;
  m.rho_inverse_closed = [](double r) { return std::asinh(r / 2.0); };
  // exp(-cosh^2) rather than exp(-sinh^2): the integration constant is
  // chosen so that conj(N_psi) N_phi = e / (2 sqrt(pi)) normalizes.
  m.phi0_exponent = -Expr::pow(cosh(kX), 2);
  m.psi0_shape = c(2.0) * cosh(kX);
  m.norm_product = std::numbers::e / (2.0 * std::sqrt(std::numbers::pi));
  return m;
}

PBModel build_builtin(std::string_view name, std::span<const cplx> params) {
  if (name == "bosonic") return bosonic();
  if (name == "shifted") return shifted(param(params, 0, 0.5), param(params, 1, cplx(0.0, 0.25)));
  if (name == "swanson") return swanson(param(params, 0, 0.3).real());
  if (name == "constant_alpha")
    return constant_alpha(param(params, 0, 2.0), param(params, 1, 0.5), param(params, 2, 0.3));
  if (name == "example1") return example1();
  if (name == "example2") return example2();
  std::ostringstream msg;
  msg << "unknown built-in model '" << name << "'";
  throw std::invalid_argument(msg.str());
}

std::vector<std::string> builtin_names() {
  return {"bosonic", "shifted", "swanson", "constant_alpha", "example1", "example2"};
}

PBModel from_expressions(std::string_view alpha_a, std::string_view beta_a, std::string_view alpha_b,
                         std::string_view beta_b, const AntiderivRegistry* registry) {
  PBModel m;
  m.name = "custom";
  m.alpha_a = parse_expr(alpha_a, registry);
  m.beta_a = parse_expr(beta_a, registry);
  m.alpha_b = parse_expr(alpha_b, registry);
  m.beta_b = parse_expr(beta_b, registry);
  m.flavor = Flavor::general;
  return m;
}

PBModel equal_alpha(std::string_view alpha, const AntiderivRegistry* registry) {
  const Expr a = parse_expr(alpha, registry);
  const Expr integrand = c(1.0) / a;
  std::optional<Expr> closed;
  if (registry) {
    auto it = registry->find(to_string(integrand));
    if (it != registry->end()) closed = it->second;
  }
  PBModel m;
  m.name = "equal_alpha";
  m.alpha_a = a;
  m.alpha_b = a;
  m.beta_a = Expr::antideriv(integrand, closed);
  m.beta_b = differentiate(a);
  m.flavor = Flavor::equal_alpha;
  m.rho = m.beta_a;
  m.phi0_exponent = c(-0.5) * Expr::pow(m.beta_a, 2);
  return m;
}

}  // namespace pbw
