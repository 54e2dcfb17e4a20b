#include "pbw/pairings.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "pbw/parallel.hpp"

namespace pbw {

namespace {

constexpr double kPairAbsTol = 1e-13;
constexpr double kPairRelTol = 1e-12;

quad::LineOptions pair_options(std::pair<double, double> bounds) {
  quad::LineOptions opts;
  opts.bounds = bounds;
  opts.abs_tol = kPairAbsTol;
  opts.rel_tol = kPairRelTol;
  return opts;
}

Expr rho_expr(const PBModel& m) {
  if (m.rho) return *m.rho;
  return Expr::antideriv(Expr::constant(1.0) / m.alpha_a);
}

double rho_slope(const Expr& rho, double x) {
  const cplx d = jet_lift(rho, x, 1)[1];
  if (std::abs(d.imag()) > 1e-12 * std::abs(d)) throw std::domain_error("rho_invert needs a real alpha");
  if (!(d.real() > 0.0)) {
    std::ostringstream msg;
    msg << "rho is not increasing at x = " << x << " (alpha changes sign or vanishes); refusing to invert";
    throw std::domain_error(msg.str());
  }
  return d.real();
}

double rho_invert_unchecked(const PBModel& m, double s);

}  // namespace

TestFunction::TestFunction(double center, double width, cplx scale)
    : center_(center), width_(width), scale_(scale) {
  if (!(width > 0.0) || !std::isfinite(width) || !std::isfinite(center))
    throw std::invalid_argument("bump needs a finite center and a positive width");
}

Jet TestFunction::eval(double x, int order) const {
  const double t = (x - center_) / width_;
  if (std::abs(t) >= 1.0) return Jet::zero(x, order);
  const Jet tj = (Jet::variable(x, order) - center_) * (1.0 / width_);
  const Jet q = Jet::constant(x, order, 1.0) - tj * tj;
  return exp(Jet::constant(x, order, -1.0) / q) * scale_;
}

cplx TestFunction::operator()(double x) const {
  const double t = (x - center_) / width_;
  if (std::abs(t) >= 1.0) return 0.0;
  return scale_ * std::exp(-1.0 / (1.0 - t * t));
}

JetFunction TestFunction::as_jet_function() const {
  return [h = *this](double x, int order) { return h.eval(x, order); };
}

TestFunction TestFunction::unit_normalized() const {
  const TestFunction unit(center_, width_, 1.0);
  const auto r = quad::integrate_interval([&](double x) { return std::norm(unit(x)); }, center_ - width_,
                                          center_ + width_, pair_options(support()));
  return TestFunction(center_, width_, 1.0 / std::sqrt(r.value.real()));
}

double rho_eval(const PBModel& m, double x) { return evaluate(rho_expr(m), x).real(); }

namespace {
double rho_invert_unchecked(const PBModel& m, double s) {
  const Expr rho = rho_expr(m);
  auto f = [&](double x) { return evaluate(rho, x).real() - s; };
  const double tol = 1e-12 * (1.0 + std::abs(s));
  double x = 0.0;
  double fx = f(x);
  rho_slope(rho, x);
  if (std::abs(fx) <= tol) return x;
  // Bracket by doubling away from 0 in the direction of s.
  const double dir = fx < 0.0 ? 1.0 : -1.0;
  double near = 0.0, far = dir;
  double ffar = f(far);
  while ((ffar < 0.0) == (fx < 0.0)) {
    rho_slope(rho, far);
    if (f(near) * dir > ffar * dir) throw std::domain_error("rho is not monotone; refusing to invert");
    near = far;
    far *= 2.0;
    if (std::abs(far) > 1e8) throw std::domain_error("rho_invert: no bracket (rho bounded?)");
    ffar = f(far);
  }
  double lo = std::min(near, far), hi = std::max(near, far);
  x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    fx = f(x);
    if (std::abs(fx) <= tol) return x;
    if (fx < 0.0)
      lo = x;
    else
      hi = x;
    double next = x - fx / rho_slope(rho, x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) return next;
    x = next;
  }
  return x;
}
}  // namespace

double rho_invert(const PBModel& m, double s) {
  try {
    return rho_invert_unchecked(m, s);
  } catch (const DomainError& e) {
    throw std::domain_error(std::string("rho cannot be inverted, alpha vanishes or is singular: ") + e.what());
  }
}

quad::IntegralResult compatibility_form(const quad::Integrand& f, const quad::Integrand& g,
                                        const quad::LineOptions& opts) {
  return quad::integrate_line([&](double x) { return std::conj(f(x)) * g(x); }, opts);
}

quad::IntegralResult state_pairing(const StateFamily& psi, const StateFamily& phi, int m, int n) {
  auto integrand = [&](double x) { return std::conj(psi.eval(m, x, 0)[0]) * phi.eval(n, x, 0)[0]; };
  const auto bounds = quad::find_support([&](double x) { return std::abs(integrand(x)); }, 1e-3 * kPairAbsTol);
  return quad::integrate_line(integrand, pair_options(bounds));
}

BiorthoReport biorthonormality_matrix(const PBModel& model, int N, int jobs) {
  if (N < 0) throw std::invalid_argument("negative matrix size");
  const StateFamily psi(model, Side::psi, N);
  const StateFamily phi(model, Side::phi, N);
  const std::size_t dim = static_cast<std::size_t>(N) + 1;
  BiorthoReport rep;
  rep.matrix.assign(dim, std::vector<cplx>(dim));
  parallel_for(dim * dim, jobs, [&](std::size_t k) {
    const int m = static_cast<int>(k / dim), n = static_cast<int>(k % dim);
    rep.matrix[k / dim][k % dim] = state_pairing(psi, phi, m, n).value;
  });
  for (std::size_t m = 0; m < dim; ++m)
    for (std::size_t n = 0; n < dim; ++n)
      rep.max_deviation = std::max(rep.max_deviation, std::abs(rep.matrix[m][n] - (m == n ? 1.0 : 0.0)));
  return rep;
}

bool has_transforms(const PBModel& m) { return m.flavor == Flavor::equal_alpha || m.flavor == Flavor::sech_pair; }

std::pair<double, double> transform_support(const PBModel& m, const TestFunction& h) {
  const auto [lo, hi] = h.support();
  if (m.flavor == Flavor::sech_pair) return {std::sinh(lo), std::sinh(hi)};
  if (m.flavor == Flavor::equal_alpha)
    return {rho_eval(m, lo) / std::numbers::sqrt2, rho_eval(m, hi) / std::numbers::sqrt2};
  throw std::invalid_argument("model '" + m.name + "' has no f_+/g_- transforms");
}

cplx transform_pm(const PBModel& m, const TestFunction& h, Transform sign, double s) {
  double x = 0.0;
  if (m.flavor == Flavor::sech_pair) {
    x = std::asinh(s);
  } else if (m.flavor == Flavor::equal_alpha) {
    const double r = std::numbers::sqrt2 * s;
    x = m.rho_inverse_closed ? m.rho_inverse_closed(r) : rho_invert(m, r);
  } else {
    throw std::invalid_argument("model '" + m.name + "' has no f_+/g_- transforms");
  }
  const cplx hx = h(x);
  if (hx == cplx{}) return 0.0;
  if (sign == Transform::minus) return hx * std::exp(0.5 * s * s);
  const double weight = m.flavor == Flavor::sech_pair ? 1.0 / std::sqrt(1.0 + s * s) : evaluate(m.alpha_a, x).real();
  return hx * weight * std::exp(-0.5 * s * s);
}

double oscillator_en(int n, double s) {
  if (n < 0) throw std::invalid_argument("negative oscillator index");
  return oscillator_table(n, s)[static_cast<std::size_t>(n)];
}

std::vector<double> oscillator_table(int N, double s) {
  std::vector<double> e(static_cast<std::size_t>(N) + 1);
  e[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * s * s);
  if (N >= 1) e[1] = std::numbers::sqrt2 * s * e[0];
  for (int k = 1; k < N; ++k)
    e[static_cast<std::size_t>(k) + 1] = std::sqrt(2.0 / (k + 1.0)) * s * e[static_cast<std::size_t>(k)] -
                                         std::sqrt(k / (k + 1.0)) * e[static_cast<std::size_t>(k) - 1];
  return e;
}

cplx pairing_via_transform(const PBModel& m, const TestFunction& h, Side side, int n) {
  const auto bounds = transform_support(m, h);
  const quad::Integrand integrand = side == Side::phi ? quad::Integrand([&](double s) {
    return std::conj(transform_pm(m, h, Transform::plus, s)) * oscillator_en(n, s);
  })
                                                      : quad::Integrand([&](double s) {
                                                          return oscillator_en(n, s) *
                                                                 transform_pm(m, h, Transform::minus, s);
                                                        });
  const cplx inner = quad::integrate_line(integrand, pair_options(bounds)).value;
  const double quarter_pi = std::pow(std::numbers::pi, 0.25);
  const cplx n_phi = 1.0;
  const cplx n_psi_bar = m.norm_product;
  if (m.flavor == Flavor::equal_alpha)
    return (side == Side::phi ? n_phi : n_psi_bar) * quarter_pi * std::numbers::sqrt2 * inner;
  const double two_n = std::pow(2.0, n);
  if (side == Side::phi) return n_phi * quarter_pi / (std::sqrt(two_n) * std::numbers::e) * inner;
  return 2.0 * n_psi_bar * std::sqrt(two_n * std::sqrt(std::numbers::pi)) * inner;
}

cplx transform_pairing(const PBModel& m, const TestFunction& f, const TestFunction& g) {
  const auto sf = transform_support(m, f);
  const auto sg = transform_support(m, g);
  const double lo = std::max(sf.first, sg.first), hi = std::min(sf.second, sg.second);
  if (!(lo < hi)) return 0.0;
  return quad::integrate_line(
             [&](double s) {
               return std::conj(transform_pm(m, f, Transform::plus, s)) * transform_pm(m, g, Transform::minus, s);
             },
             pair_options({lo, hi}))
      .value;
}

QuasiBasisTrace quasi_basis_sum(const PBModel& m, const TestFunction& f, const TestFunction& g, int N,
                                Ordering ordering, int jobs) {
  if (N < 0) throw std::invalid_argument("negative truncation");
  const StateFamily phi(m, Side::phi, N);
  const StateFamily psi(m, Side::psi, N);
  const StateFamily& left = ordering == Ordering::phi_psi ? phi : psi;
  const StateFamily& right = ordering == Ordering::phi_psi ? psi : phi;
  const std::size_t dim = static_cast<std::size_t>(N) + 1;
  std::vector<cplx> A(dim), B(dim);
  parallel_for(2 * dim, jobs, [&](std::size_t k) {
    const int n = static_cast<int>(k % dim);
    if (k < dim)
      A[k] = quad::integrate_line([&](double x) { return std::conj(f(x)) * left.eval(n, x, 0)[0]; },
                                  pair_options(f.support()))
                 .value;
    else
      B[k - dim] = quad::integrate_line([&](double x) { return std::conj(right.eval(n, x, 0)[0]) * g(x); },
                                        pair_options(g.support()))
                       .value;
  });

  QuasiBasisTrace t;
  const double lo = std::max(f.support().first, g.support().first);
  const double hi = std::min(f.support().second, g.support().second);
  if (lo < hi)
    t.exact = quad::integrate_line([&](double x) { return std::conj(f(x)) * g(x); }, pair_options({lo, hi})).value;
  cplx s = 0.0;
  for (std::size_t n = 0; n < dim; ++n) {
    s += A[n] * B[n];
    t.partial_sums.push_back(s);
    t.deviation.push_back(std::abs(s - t.exact));
  }
  t.final_deviation = t.deviation.back();
  if (has_transforms(m)) {
    const double factor = m.flavor == Flavor::equal_alpha ? std::numbers::sqrt2 : 1.0;
    t.transform_value = factor * transform_pairing(m, f, g);
    t.transform_deviation = std::abs(t.transform_value - t.exact);
  } else {
    t.transform_value = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
    t.transform_deviation = std::numeric_limits<double>::quiet_NaN();
  }
  return t;
}

}  // namespace pbw
