#include "pbw/spectral.hpp"

#include <cmath>
#include <functional>

namespace pbw {

std::array<cplx, 3> HamiltonianCoeffs::at(double x) const {
  const Jet aa = jet_lift(model_.alpha_a, x, 1);
  const Jet ab = jet_lift(model_.alpha_b, x, 1);
  const Jet ba = jet_lift(model_.beta_a, x, 1);
  const Jet bb = jet_lift(model_.beta_b, x, 1);
  if (side_ == HSide::H) {
    const cplx c2 = aa[0] * ab[0];
    const cplx c1 = aa[0] * bb[0] - ab[0] * ba[0] - 2.0 * aa[0] * ab[1];
    const cplx c0 = ba[0] * bb[0] - (ba * ab)[1];
    return {c2, c1, c0};
  }
  const cplx c2 = aa[0] * ab[0];
  const cplx c1 = ab[0] * ba[0] - aa[0] * bb[0] - 2.0 * ab[0] * aa[1];
  const cplx c0 = ba[0] * bb[0] - (bb * aa)[1];
  return {std::conj(c2), std::conj(c1), std::conj(c0)};
}

HamiltonianCoeffs hamiltonian_coeffs(const PBModel& m, HSide side) { return HamiltonianCoeffs(m, side); }

cplx apply_hamiltonian(const HamiltonianCoeffs& h, const JetFunction& f, double x) {
  const Jet fj = f(x, 2);
  if (fj.order() < 2) throw std::invalid_argument("apply_hamiltonian needs f to order 2");
  const auto c = h.at(x);
  return -c[0] * fj.derivative_value(2) + c[1] * fj[1] + c[2] * fj[0];
}

cplx apply_hamiltonian(const PBModel& m, HSide side, const JetFunction& f, double x) {
  return apply_hamiltonian(HamiltonianCoeffs(m, side), f, x);
}

namespace {

constexpr double kUnderflow = 1e-250;

double relative_sup(const std::function<cplx(double)>& residual, const StateFamily& fam, int n,
                    std::span<const double> grid) {
  double num = 0.0, den = 0.0;
  for (double x : grid) {
    const cplx v = fam.eval(n, x, 0)[0];
    if (std::abs(v) < kUnderflow) continue;
    den = std::max(den, std::abs(v));
    num = std::max(num, std::abs(residual(x)));
  }
  if (den == 0.0) throw std::domain_error("state underflows on the whole grid");
  return num / den;
}

}  // namespace

double eigen_residual(const PBModel& m, HSide side, int n, std::span<const double> grid) {
  const StateFamily fam(m, side == HSide::H ? Side::phi : Side::psi, std::max(n, 1));
  const HamiltonianCoeffs h(m, side);
  const JetFunction state = fam.state(n);
  return relative_sup(
      [&](double x) { return apply_hamiltonian(h, state, x) - static_cast<double>(n) * fam.eval(n, x, 0)[0]; }, fam,
      n, grid);
}

double hsusy_shift_check(const PBModel& m, int n, std::span<const double> grid, HSide side) {
  const bool h = side == HSide::H;
  const StateFamily fam(m, h ? Side::phi : Side::psi, std::max(n, 1));
  // ab acts as a(b f); b^dag a^dag as b^dag(a^dag f).
  const JetFunction inner = ladder(m, h ? Ladder::b : Ladder::a_dag, fam.state(n));
  const Ladder outer = h ? Ladder::a : Ladder::b_dag;
  return relative_sup(
      [&](double x) { return apply_ladder(m, outer, inner, x, 0)[0] - (n + 1.0) * fam.eval(n, x, 0)[0]; }, fam, n,
      grid);
}

std::vector<std::string> printed_hamiltonian_names() { return {"constant_k", "example1", "example2"}; }

namespace {

using Printed = std::array<std::function<double(double)>, 6>;

Printed printed(std::string_view name, double k) {
  if (name == "constant_k")
    return {[](double) { return 1.0; }, [k](double x) { return k - x; },  [k](double x) { return k * x - 1.0; },
            [](double) { return 1.0; }, [k](double x) { return x - k; },  [k](double x) { return k * x; }};
  if (name == "example1") {
    return {
        [](double x) { return 1.0 / std::pow(1.0 + x * x, 2); },
        [](double x) {
          const double x2 = x * x;
          return -x * (-3.0 + 7.0 * x2 + 5.0 * x2 * x2 + x2 * x2 * x2) / (3.0 * std::pow(1.0 + x2, 3));
        },
        [](double) { return -1.0; },
        [](double x) { return 1.0 / std::pow(1.0 + x * x, 2); },
        [](double x) {
          const double x2 = x * x;
          return x * (21.0 + 7.0 * x2 + 5.0 * x2 * x2 + x2 * x2 * x2) / (3.0 * std::pow(1.0 + x2, 3));
        },
        [](double x) {
          const double x2 = x * x;
          return -2.0 * (-3.0 + 18.0 * x2 + 7.0 * x2 * x2 + 5.0 * std::pow(x2, 3) + std::pow(x2, 4)) /
                 (3.0 * std::pow(1.0 + x2, 4));
        }};
  }
  if (name == "example2") {
    auto sech2 = [](double x) { return 1.0 / (std::cosh(x) * std::cosh(x)); };
    return {[](double x) { return 1.0 / (2.0 * std::cosh(x) * std::cosh(x)); },
            [sech2](double x) { return 0.5 * (sech2(x) - 2.0) * std::tanh(x); },
            [](double) { return -1.0; },
            [](double x) { return 1.0 / (2.0 * std::cosh(x) * std::cosh(x)); },
            [sech2](double x) { return (1.5 * sech2(x) + 1.0) * std::tanh(x); },
            [](double x) {
              return -(-9.0 + 4.0 * std::cosh(2.0 * x) + std::cosh(4.0 * x)) / (8.0 * std::pow(std::cosh(x), 4));
            }};
  }
  throw std::invalid_argument("no printed Hamiltonian named '" + std::string(name) + "'");
}

}  // namespace

CrosscheckReport builtin_hamiltonian_crosscheck(std::string_view name, std::span<const double> grid, double k) {
  const Printed p = printed(name, k);
  PBModel m;
  if (name == "constant_k")
    m = constant_alpha(1.0, 1.0, k);
  else if (name == "example1")
    m = example1();
  else
    m = example2();
  const HamiltonianCoeffs h(m, HSide::H), hd(m, HSide::H_dag);
  CrosscheckReport rep;
  rep.name = std::string(name);
  for (double x : grid) {
    const auto c = h.at(x);
    const auto q = hd.at(x);
    const cplx derived[6] = {c[0], c[1], c[2], q[0], q[1], q[2]};
    for (std::size_t i = 0; i < 6; ++i)
      rep.deviation[i] = std::max(rep.deviation[i], std::abs(derived[i] - p[i](x)));
  }
  for (double d : rep.deviation) rep.max_deviation = std::max(rep.max_deviation, d);
  return rep;
}

}  // namespace pbw
