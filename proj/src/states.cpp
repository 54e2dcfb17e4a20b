#include "pbw/states.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pbw/integrate.hpp"

namespace pbw {

namespace {

double inv_sqrt_factorial(int n) {
  double v = 1.0;
  for (int k = 2; k <= n; ++k) v /= std::sqrt(static_cast<double>(k));
  return v;
}

cplx int_pow(cplx base, int n) {
  cplx v = 1.0;
  for (int k = 0; k < n; ++k) v *= base;
  return v;
}

}  // namespace

Jet vacuum_shape(const PBModel& m, Side side, double x, int order) {
  if (side == Side::phi) {
    if (m.phi0_exponent) return exp(jet_lift(*m.phi0_exponent, x, order));
    const Expr integrand = m.beta_a / m.alpha_a;
    return exp(-jet_lift(Expr::antideriv(integrand), x, order));
  }
  if (m.psi0_shape) return jet_lift(*m.psi0_shape, x, order);
  if (m.flavor == Flavor::equal_alpha)
    return Jet::constant(x, order, 1.0) / jet_lift(m.alpha_b, x, order).conj();
  const PBModel& model = m;
  const JetFunction integrand = [&model](double t, int k) {
    return (jet_lift(model.beta_b, t, k) / jet_lift(model.alpha_b, t, k)).conj();
  };
  return exp(-quad::antiderivative_jet(integrand, x, order));
}

Jet vacuum(const PBModel& m, Side side, double x, int order) {
  Jet v = vacuum_shape(m, side, x, order);
  if (side == Side::psi) v *= std::conj(m.norm_product);
  return v;
}

Jet pi_sigma_recursive(const PBModel& m, PolySide side, int n, double x, int order, int max_order) {
  if (n < 0) throw std::invalid_argument("negative state index");
  const int top = order + n;
  if (top > max_order) {
    std::ostringstream msg;
    msg << "recursion to level " << n << " at order " << order << " needs jets of order " << top
        << ", above the limit " << max_order;
    throw CapacityError(msg.str());
  }
  const bool pi = side == PolySide::pi;
  Jet coeff = Jet::zero(x, top);
  const Jet slope = pi ? jet_lift(m.alpha_b, x, top) : jet_lift(m.alpha_a, x, top).conj();
  if (m.flavor == Flavor::equal_alpha || m.flavor == Flavor::sech_pair) {
    // beta_b = alpha_b' by construction, so theta/alpha_a - alpha_b' = (alpha_b/alpha_a) beta_a
    // and theta/alpha_b - alpha_a' = beta_a. Skipping the cancelling terms keeps the
    // high-order coefficients free of roundoff, which the derivatives amplify.
    const Jet ba = jet_lift(m.beta_a, x, top);
    const double ratio = m.flavor == Flavor::sech_pair ? 0.5 : 1.0;
    coeff = pi ? ba * ratio : ba.conj();
  } else {
    const Jet theta = theta_jet(m, x, top + 1);
    if (pi)
      coeff = (theta.truncated(top) / jet_lift(m.alpha_a, x, top)) - jet_lift(m.alpha_b, x, top + 1).derivative();
    else
      coeff = ((theta.truncated(top) / jet_lift(m.alpha_b, x, top)) - jet_lift(m.alpha_a, x, top + 1).derivative())
                  .conj();
  }
  Jet p = Jet::constant(x, top, 1.0);
  for (int level = 1; level <= n; ++level) {
    const int o = top - level;
    p = coeff.truncated(o) * p.truncated(o) - slope.truncated(o) * p.derivative();
  }
  return p;
}

bool has_closed_form(const PBModel& m) {
  switch (m.flavor) {
    case Flavor::constant_alpha: return m.constant.has_value();
    case Flavor::equal_alpha: return m.rho.has_value();
    case Flavor::sech_pair: return true;
    case Flavor::general: return false;
  }
  return false;
}

Jet pi_sigma_closed(const PBModel& m, PolySide side, int n, double x, int order) {
  if (!has_closed_form(m))
    throw std::invalid_argument("model '" + m.name +
                                "' has no closed form for pi_n / sigma_n; use pi_sigma_recursive");
  const Jet var = Jet::variable(x, order);
  switch (m.flavor) {
    case Flavor::constant_alpha: {
      const ConstantAlpha& p = *m.constant;
      const bool pi = side == PolySide::pi;
      const cplx aa = pi ? p.alpha_a : std::conj(p.alpha_b);
      const cplx ab = pi ? p.alpha_b : std::conj(p.alpha_a);
      const cplx k = pi ? p.k : std::conj(p.k);
      const cplx s = std::sqrt(2.0 * aa * ab);
      const Jet y = (var + k) * (1.0 / s);
      return hermite(n, y) * int_pow(ab / s, n);
    }
    case Flavor::equal_alpha: {
      Jet rho = jet_lift(*m.rho, x, order);
      if (side == PolySide::sigma) rho = rho.conj();
      return hermite(n, rho * (1.0 / std::numbers::sqrt2)) * std::pow(2.0, -0.5 * n);
    }
    case Flavor::sech_pair: {
      const Jet h = hermite(n, sinh(var));
      return side == PolySide::pi ? h * std::pow(2.0, -n) : h;
    }
    case Flavor::general: break;
  }
  throw std::logic_error("unreachable");
}

StateFamily::StateFamily(PBModel model, Side side, int max_n)
    : model_(std::move(model)), side_(side), max_n_(max_n) {}

cplx StateFamily::normalization() const { return side_ == Side::phi ? cplx(1.0) : std::conj(model_.norm_product); }

Jet StateFamily::eval(int n, double x, int order) const {
  if (!has_closed_form(model_)) return eval_recursive(n, x, order);
  if (n < 0 || n > max_n_) throw std::out_of_range("state index outside the family");
  const PolySide poly = side_ == Side::phi ? PolySide::pi : PolySide::sigma;
  return pi_sigma_closed(model_, poly, n, x, order) * vacuum(model_, side_, x, order) * inv_sqrt_factorial(n);
}

Jet StateFamily::eval_recursive(int n, double x, int order) const {
  if (n < 0 || n > max_n_) throw std::out_of_range("state index outside the family");
  const PolySide poly = side_ == Side::phi ? PolySide::pi : PolySide::sigma;
  const int capacity = std::max(kDefaultMaxOrder, max_n_ + order);
  return pi_sigma_recursive(model_, poly, n, x, order, capacity) * vacuum(model_, side_, x, order) *
         inv_sqrt_factorial(n);
}

JetFunction StateFamily::state(int n) const {
  return [fam = *this, n](double x, int order) { return fam.eval(n, x, order); };
}

cplx fix_normalization(const PBModel& m) {
  auto integrand = [&m](double x) {
    return std::conj(vacuum_shape(m, Side::psi, x, 0).value()) * vacuum_shape(m, Side::phi, x, 0).value();
  };
  const double peak = std::max(std::abs(integrand(0.0)), 1e-300);
  const auto bounds = quad::find_support([&](double x) { return std::abs(integrand(x)); }, 1e-17 * peak);
  quad::LineOptions opts;
  opts.bounds = bounds;
  opts.abs_tol = 1e-14 * peak;
  opts.rel_tol = 1e-13;
  const cplx I = quad::integrate_line(integrand, opts).value;
  if (!std::isfinite(std::abs(I)) || std::abs(I) == 0.0)
    throw std::domain_error("vacuum pairing <psi_0, phi_0> is zero or divergent");
  return 1.0 / I;
}

PBModel normalized(PBModel m) {
  m.norm_product = fix_normalization(m);
  return m;
}

double LadderResiduals::max_relative() const {
  return std::max({b_phi / phi_scale, a_phi / phi_scale, a_dag_psi / psi_scale, b_dag_psi / psi_scale});
}

LadderResiduals verify_ladder(const PBModel& m, int n, std::span<const double> grid) {
  const StateFamily phi(m, Side::phi, n + 1);
  const StateFamily psi(m, Side::psi, n + 1);
  const double up = std::sqrt(n + 1.0);
  const double down = std::sqrt(static_cast<double>(n));
  LadderResiduals r;
  for (double x : grid) {
    const auto phi_n = phi.state(n);
    const auto psi_n = psi.state(n);
    const cplx phi_up = phi.eval(n + 1, x, 0).value();
    const cplx psi_up = psi.eval(n + 1, x, 0).value();
    const cplx phi_down = n > 0 ? phi.eval(n - 1, x, 0).value() : cplx{};
    const cplx psi_down = n > 0 ? psi.eval(n - 1, x, 0).value() : cplx{};
    r.b_phi = std::max(r.b_phi, std::abs(apply_ladder(m, Ladder::b, phi_n, x, 0).value() - up * phi_up));
    r.a_phi = std::max(r.a_phi, std::abs(apply_ladder(m, Ladder::a, phi_n, x, 0).value() - down * phi_down));
    r.a_dag_psi =
        std::max(r.a_dag_psi, std::abs(apply_ladder(m, Ladder::a_dag, psi_n, x, 0).value() - up * psi_up));
    r.b_dag_psi =
        std::max(r.b_dag_psi, std::abs(apply_ladder(m, Ladder::b_dag, psi_n, x, 0).value() - down * psi_down));
    r.phi_scale = std::max({r.phi_scale, std::abs(phi.eval(n, x, 0).value()), std::abs(phi_up), std::abs(phi_down)});
    r.psi_scale = std::max({r.psi_scale, std::abs(psi.eval(n, x, 0).value()), std::abs(psi_up), std::abs(psi_down)});
  }
  return r;
}

}  // namespace pbw
