#include "pbw/model.hpp"

#include <algorithm>
#include <cmath>

namespace pbw {

PBModel with_norm_product(PBModel m, cplx product) {
  m.norm_product = product;
  return m;
}

Jet theta_jet(const PBModel& m, double x, int order) {
  return jet_lift(m.alpha_a, x, order) * jet_lift(m.beta_b, x, order) +
         jet_lift(m.alpha_b, x, order) * jet_lift(m.beta_a, x, order);
}

ConditionReport check_pb_conditions(const PBModel& m, std::span<const double> grid, double tol) {
  ConditionReport r;
  r.grid.assign(grid.begin(), grid.end());
  r.tolerance = tol;
  for (double x : grid) {
    const Jet aa = jet_lift(m.alpha_a, x, 2);
    const Jet ab = jet_lift(m.alpha_b, x, 2);
    const Jet ba = jet_lift(m.beta_a, x, 1);
    const Jet bb = jet_lift(m.beta_b, x, 1);
    const cplx r1 = aa[0] * ab[1] - aa[1] * ab[0];
    const cplx r2 = aa[0] * bb[1] + ab[0] * ba[1] - 1.0 - aa[0] * ab.derivative_value(2);
    r.residual1.push_back(r1);
    r.residual2.push_back(r2);
    r.max_abs1 = std::max(r.max_abs1, std::abs(r1));
    r.max_abs2 = std::max(r.max_abs2, std::abs(r2));
  }
  r.pass = r.max_abs1 < tol && r.max_abs2 < tol;
  return r;
}

Jet apply_ladder(const PBModel& m, Ladder which, const JetFunction& f, double x, int order) {
  const Jet fj = f(x, order + 1);
  if (fj.order() < order + 1) throw std::invalid_argument("ladder operator needs the operand to order + 1");
  const Jet df = fj.derivative();
  const Jet f0 = fj.truncated(order);
  switch (which) {
    case Ladder::a:
      return jet_lift(m.alpha_a, x, order) * df + jet_lift(m.beta_a, x, order) * f0;
    case Ladder::b:
      return -(jet_lift(m.alpha_b, x, order + 1) * fj).derivative() + jet_lift(m.beta_b, x, order) * f0;
    case Ladder::a_dag:
      return -(jet_lift(m.alpha_a, x, order + 1).conj() * fj).derivative() +
             jet_lift(m.beta_a, x, order).conj() * f0;
    case Ladder::b_dag:
      return jet_lift(m.alpha_b, x, order).conj() * df + jet_lift(m.beta_b, x, order).conj() * f0;
  }
  throw std::invalid_argument("unknown ladder operator");
}

JetFunction ladder(const PBModel& m, Ladder which, JetFunction f) {
  return [m, which, f = std::move(f)](double x, int order) { return apply_ladder(m, which, f, x, order); };
}

ResidualStats commutator_residual(const PBModel& m, const JetFunction& f, std::span<const double> grid) {
  const JetFunction ab = ladder(m, Ladder::a, ladder(m, Ladder::b, f));
  const JetFunction ba = ladder(m, Ladder::b, ladder(m, Ladder::a, f));
  ResidualStats stats;
  for (double x : grid) {
    const double r = std::abs(ab(x, 0).value() - ba(x, 0).value() - f(x, 0).value());
    if (r > stats.max_abs || std::isnan(r)) {
      stats.max_abs = r;
      stats.at_x = x;
    }
  }
  return stats;
}

Expr differentiate(const Expr& e) {
  const auto& ch = e.children();
  const Expr zero = Expr::constant(0.0);
  switch (e.kind()) {
    case ExprKind::var: return Expr::constant(1.0);
    case ExprKind::constant: return zero;
    case ExprKind::add: return differentiate(ch[0]) + differentiate(ch[1]);
    case ExprKind::sub: return differentiate(ch[0]) - differentiate(ch[1]);
    case ExprKind::mul: return differentiate(ch[0]) * ch[1] + ch[0] * differentiate(ch[1]);
    case ExprKind::div:
      return (differentiate(ch[0]) * ch[1] - ch[0] * differentiate(ch[1])) / Expr::pow(ch[1], 2);
    case ExprKind::neg: return -differentiate(ch[0]);
    case ExprKind::pow: {
      const int k = e.exponent();
      if (k == 0) return zero;
      return Expr::constant(static_cast<double>(k)) * Expr::pow(ch[0], k - 1) * differentiate(ch[0]);
    }
    case ExprKind::exp: return e * differentiate(ch[0]);
    case ExprKind::sinh: return cosh(ch[0]) * differentiate(ch[0]);
    case ExprKind::cosh: return sinh(ch[0]) * differentiate(ch[0]);
    case ExprKind::tanh: return differentiate(ch[0]) / Expr::pow(cosh(ch[0]), 2);
    case ExprKind::sqrt: return differentiate(ch[0]) / (Expr::constant(2.0) * e);
    case ExprKind::antideriv: return ch[0];
  }
  throw std::logic_error("unhandled expression kind");
}

std::vector<double> linspace(double lo, double hi, int points) {
  if (points < 2) throw std::invalid_argument("a grid needs at least two points");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return g;
}

}  // namespace pbw
