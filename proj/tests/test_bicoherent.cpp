#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pbw/bicoherent.hpp"

using pbw::cplx;
using pbw::Coherent;

namespace {

cplx integrate(const std::function<cplx(double)>& f, std::pair<double, double> bounds) {
  pbw::quad::LineOptions opts;
  opts.bounds = bounds;
  opts.abs_tol = 1e-14;
  opts.rel_tol = 1e-13;
  return pbw::quad::integrate_line(f, opts).value;
}

}  // namespace

TEST_CASE("coherent normalization") {
  const auto p = pbw::pseudo_bosonic_profile();
  CHECK(std::abs(pbw::coherent_norm(1.0, p) - std::exp(-0.5)) < 1e-15);
  CHECK(pbw::coherent_norm(0.0, p) == 1.0);
  for (double r : {0.3, 2.0, 7.5}) CHECK(std::abs(pbw::coherent_norm(r, p) / std::exp(-0.5 * r * r) - 1.0) < 1e-13);

  pbw::GrowthProfile linear;
  linear.alpha = [](int n) { return static_cast<double>(n); };
  // sum 1 / (k!)^2 = I_0(2)
  CHECK(std::abs(pbw::coherent_norm(1.0, linear) - 1.0 / std::sqrt(std::cyl_bessel_i(0.0, 2.0))) < 1e-15);
  CHECK(linear.alpha_factorial(5) == doctest::Approx(120.0).epsilon(1e-14));
}

TEST_CASE("convergence radius") {
  CHECK(std::isinf(pbw::convergence_radius(pbw::pseudo_bosonic_profile())));
  pbw::GrowthProfile bounded;
  bounded.alpha = [](int n) { return 1.0 - 1.0 / (n + 1.0); };
  bounded.alpha_bar = 1.0;
  CHECK(pbw::convergence_radius(bounded) == 1.0);
  CHECK_THROWS_AS(pbw::coherent_norm(1.0, bounded), std::domain_error);
  CHECK_NOTHROW(pbw::coherent_norm(0.5, bounded));
  bounded.M_phi = 0.0;
  CHECK(pbw::convergence_radius(bounded) == 0.0);
  bounded.M_phi = 1.0;
  bounded.r_psi = 4.0;
  CHECK(pbw::convergence_radius(bounded) == 0.25);
}

TEST_CASE("radial moments of the coherent measure") {
  const auto p = pbw::pseudo_bosonic_profile();
  const auto rows = pbw::moment_check([](double r) { return r * std::exp(-r * r) / std::numbers::pi; }, p, 12);
  REQUIRE(rows.size() == 13);
  CHECK(std::abs(rows[0].moment - 1.0 / (2.0 * std::numbers::pi)) < 1e-15);
  double fact = 1.0;
  for (const auto& row : rows) {
    if (row.k > 0) fact *= row.k;
    INFO("k=" << row.k);
    CHECK(std::abs(row.expected - fact / (2.0 * std::numbers::pi)) <= 1e-14 * row.expected);
    CHECK(row.relative <= 1e-10);
  }
  const auto zero = pbw::moment_check([](double) { return 0.0; }, p, 3);
  for (const auto& row : zero) CHECK(row.relative == doctest::Approx(1.0));
}

TEST_CASE("weak pairing with a coherent state") {
  const auto e2 = pbw::example2();
  const pbw::TestFunction g(0.2, 1.1, cplx(0.7, -0.4));
  const auto origin = pbw::weak_pairing(e2, {cplx{}, Coherent::Phi}, g);
  const pbw::StateFamily phi(e2, pbw::Side::phi, 200), psi(e2, pbw::Side::psi, 200);
  auto coefficient = [&](const pbw::StateFamily& fam, int n) {
    return integrate([&](double x) { return std::conj(fam.eval(n, x, 0)[0]) * g(x); }, g.support());
  };
  CHECK(origin.terms == 1);
  CHECK(std::abs(origin.value - coefficient(phi, 0)) < 1e-14);
  CHECK(origin.rigorous);

  // Brute force to 200 terms at z = 1.
  for (const auto side : {Coherent::Phi, Coherent::Psi}) {
    const auto& fam = side == Coherent::Phi ? phi : psi;
    const cplx z(1.0, 0.0);
    cplx brute = 0.0, w = std::exp(-0.5);
    for (int n = 0; n <= 200; ++n) {
      if (n > 0) w *= std::conj(z) / std::sqrt(static_cast<double>(n));
      if (std::abs(w) < 1e-300) break;
      brute += w * coefficient(fam, n);
    }
    const auto wp = pbw::weak_pairing(e2, {z, side, 60, 1e-12}, g);
    CHECK(wp.terms < 60);
    CHECK(wp.tail_bound < 1e-12);
    CHECK(std::abs(wp.value - brute) <= 1e-11);
  }

  // Linearity in g.
  const pbw::TestFunction g2(0.2, 1.1, cplx(2.1, 0.5));
  const cplx z(0.4, -0.9);
  const auto v1 = pbw::weak_pairing(e2, {z, Coherent::Psi}, g).value;
  const auto v2 = pbw::weak_pairing(e2, {z, Coherent::Psi}, g2).value;
  CHECK(std::abs(v2 - v1 * (cplx(2.1, 0.5) / cplx(0.7, -0.4))) < 1e-12 * std::abs(v2));

  CHECK_THROWS_AS(pbw::weak_pairing(e2, {cplx(6.0, 0.0), Coherent::Psi, 10, 1e-12}, g), std::runtime_error);
}

TEST_CASE("coefficient bounds hold") {
  for (const auto& m : {pbw::example1(), pbw::example2()}) {
    const pbw::TestFunction g(-0.3, 1.4, cplx(1.0, 0.5));
    const pbw::StateFamily phi(m, pbw::Side::phi, 20), psi(m, pbw::Side::psi, 20);
    for (int n = 0; n <= 20; ++n) {
      const cplx cp = integrate([&](double x) { return std::conj(phi.eval(n, x, 0)[0]) * g(x); }, g.support());
      const cplx cs = integrate([&](double x) { return std::conj(psi.eval(n, x, 0)[0]) * g(x); }, g.support());
      INFO(m.name << " n=" << n);
      CHECK(std::abs(cp) <= pbw::coefficient_bound(m, Coherent::Phi, g, n) * (1.0 + 1e-10));
      CHECK(std::abs(cs) <= pbw::coefficient_bound(m, Coherent::Psi, g, n) * (1.0 + 1e-10));
    }
  }
  CHECK_THROWS_AS(pbw::coefficient_bound(pbw::swanson(0.3), Coherent::Phi, pbw::TestFunction(0.0, 1.0), 0),
                  std::invalid_argument);
}

TEST_CASE("eigen relations of the coherent states") {
  const pbw::TestFunction g(0.1, 1.2, cplx(0.3, 0.8));
  const auto at_origin = pbw::eigen_relation_residual(pbw::example1(), cplx{}, g);
  CHECK(std::abs(at_origin.lhs_phi) < 1e-13);
  CHECK(std::abs(at_origin.lhs_psi) < 1e-13);
  const auto e2 = pbw::eigen_relation_residual(pbw::example2(), cplx(1.0, 1.0), g);
  CHECK(e2.residual_phi <= 1e-8);
  CHECK(e2.residual_psi <= 1e-8);
  const auto e1 = pbw::eigen_relation_residual(pbw::example1(), cplx(-0.5, 1.5), g);
  CHECK(e1.residual_phi <= 1e-8);
  CHECK(e1.residual_psi <= 1e-8);
  const auto bos = pbw::eigen_relation_residual(pbw::bosonic(), cplx(2.0, 0.0), g);
  CHECK(bos.residual_phi <= 1e-10);
  CHECK(bos.residual_psi <= 1e-10);
}

TEST_CASE("eigen relations on a ring of z values") {
  const pbw::TestFunction g(-0.1, 1.3);
  std::vector<cplx> zs{cplx{}};
  for (int k = 0; k < 8; ++k) zs.push_back(std::polar(k % 2 == 0 ? 2.0 : 1.0, k * std::numbers::pi / 4.0));
  for (const auto& m : {pbw::example1(), pbw::example2()}) {
    const auto all = pbw::eigen_relation_residuals(m, zs, g);
    REQUIRE(all.size() == 9);
    const auto single = pbw::eigen_relation_residual(m, zs[3], g);
    CHECK(std::abs(single.lhs_phi - all[3].lhs_phi) == 0.0);
    for (std::size_t i = 1; i < zs.size(); ++i) {
      INFO(m.name << " z=" << zs[i]);
      CHECK(all[i].residual_phi <= 1e-8);
      CHECK(all[i].residual_psi <= 1e-8);
    }
  }
}

TEST_CASE("bosonic coherent states against the closed form") {
  const auto m = pbw::bosonic();
  const pbw::TestFunction g(0.4, 1.5, cplx(1.0, -0.2));
  for (const cplx z : {cplx(0.0, 0.0), cplx(1.0, 0.5), cplx(-2.0, 1.0)}) {
    // Phi(z) = pi^{1/4} Phi_c(z), Psi(z) = pi^{-1/4} Phi_c(z) for this model.
    const cplx closed =
        integrate([&](double x) { return std::conj(pbw::classical_coherent_state(z, x)) * g(x); }, g.support());
    const cplx phi = pbw::weak_pairing(m, {z, Coherent::Phi}, g).value;
    const cplx psi = pbw::weak_pairing(m, {z, Coherent::Psi}, g).value;
    INFO("z=" << z);
    CHECK(std::abs(phi - std::pow(std::numbers::pi, 0.25) * closed) <= 1e-10);
    CHECK(std::abs(psi - std::pow(std::numbers::pi, -0.25) * closed) <= 1e-10);
  }
  // Closed form is normalized.
  const cplx z(0.7, -0.3);
  const cplx norm = integrate([&](double x) { return std::norm(pbw::classical_coherent_state(z, x)); }, {-12.0, 12.0});
  CHECK(std::abs(norm - 1.0) < 1e-12);
}

TEST_CASE("terms for a radius") {
  CHECK(pbw::terms_for_radius(1.0) == 60);
  const int n6 = pbw::terms_for_radius(6.0);
  CHECK(n6 > 60);
  CHECK(n6 < 140);
  CHECK(pbw::terms_for_radius(8.0) > n6);
}

TEST_CASE("resolution of the identity") {
  for (const auto& m : {pbw::example1(), pbw::example2()}) {
    const pbw::TestFunction f(0.0, 0.8);
    pbw::ResolutionOptions opts;
    opts.trace_radii = {1.0, 2.0, 3.0, 4.0, 5.0};
    const auto res = pbw::resolution_of_identity(m, f, f, 6.0, opts);
    INFO(m.name);
    CHECK(std::abs(res.phi_psi - res.exact) <= 1e-3);
    CHECK(std::abs(res.psi_phi - res.exact) <= 1e-3);
    CHECK(std::abs(res.phi_psi - res.series_phi_psi) <= 1e-12);
    CHECK(std::abs(res.psi_phi - res.series_psi_phi) <= 1e-12);
    CHECK(res.angular_change <= 1e-12);
    REQUIRE(res.trace.size() == 6);
    CHECK(res.trace.back().R == 6.0);
    for (std::size_t i = 1; i < res.trace.size(); ++i) {
      CHECK(res.trace[i].deviation_phi_psi < res.trace[i - 1].deviation_phi_psi);
      CHECK(res.trace[i].deviation_psi_phi < res.trace[i - 1].deviation_psi_phi);
    }
  }
  // Off-center complex pair.
  const pbw::TestFunction f(0.1, 1.4, cplx(1.0, 0.3)), g(-0.2, 1.5, cplx(0.6, -0.5));
  const auto res = pbw::resolution_of_identity(pbw::example2(), f, g, 6.0);
  CHECK(std::abs(res.phi_psi - res.exact) <= 1e-3 * std::abs(res.exact));
  CHECK(std::abs(res.psi_phi - res.exact) <= 1e-3 * std::abs(res.exact));
}

TEST_CASE("resolution with disjoint supports") {
  const pbw::TestFunction f(-2.0, 0.8), g(2.0, 0.8);
  const auto res = pbw::resolution_of_identity(pbw::example1(), f, g, 5.0);
  CHECK(res.exact == cplx(0.0, 0.0));
  CHECK(std::abs(res.phi_psi) <= 1e-3);
  CHECK(std::abs(res.psi_phi) <= 1e-3);
}

TEST_CASE("bosonic resolution against the closed form") {
  const auto m = pbw::bosonic();
  const pbw::TestFunction f(0.3, 1.2, cplx(1.0, 0.4)), g(-0.1, 1.3);
  pbw::ResolutionOptions opts;
  opts.jobs = 4;
  const auto res = pbw::resolution_of_identity(m, f, g, 6.0, opts);
  CHECK(std::abs(res.phi_psi - res.exact) <= 1e-3 * std::abs(res.exact));
  CHECK(std::abs(res.psi_phi - res.exact) <= 1e-3 * std::abs(res.exact));

  // Same integral with the closed-form coherent state on a coarse polar grid.
  const double R = 6.0;
  const auto radial = pbw::quad::gauss_legendre(40, 0.0, R * R);
  const int n_theta = 48;
  cplx direct = 0.0;
  for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
    const double r = std::sqrt(radial.nodes[i]);
    for (int j = 0; j < n_theta; ++j) {
      const cplx z = std::polar(r, 2.0 * std::numbers::pi * j / n_theta);
      const cplx left = integrate([&](double x) { return std::conj(f(x)) * pbw::classical_coherent_state(z, x); },
                                  f.support());
      const cplx right = integrate([&](double x) { return std::conj(pbw::classical_coherent_state(z, x)) * g(x); },
                                   g.support());
      direct += radial.weights[i] * left * right / static_cast<double>(n_theta);
    }
  }
  CHECK(std::abs(direct - res.phi_psi) <= 1e-6 * std::abs(res.exact));

  // Wide bumps have fast-decaying coefficients; R = 8 then reaches 1e-6.
  const pbw::TestFunction wide(0.0, 4.0);
  const auto big = pbw::resolution_of_identity(m, wide, wide, 8.0);
  CHECK(std::abs(big.phi_psi - big.exact) <= 1e-6);
  CHECK(std::abs(big.psi_phi - big.exact) <= 1e-6);
}

TEST_CASE("uniform angular rule is exact on trigonometric monomials") {
  // The average over n nodes of e^{i k theta} vanishes for 0 < |k| < n.
  const int n = 9;
  for (int k = -8; k <= 8; ++k) {
    cplx s = 0.0;
    for (int j = 0; j < n; ++j) s += std::polar(1.0, 2.0 * std::numbers::pi * k * j / n);
    s /= static_cast<double>(n);
    CHECK(std::abs(s - (k == 0 ? 1.0 : 0.0)) < 1e-14);
  }
  const pbw::TestFunction f(0.0, 1.3), g(0.1, 1.4);
  pbw::ResolutionOptions coarse;
  coarse.terms = 30;
  coarse.n_theta = 61;
  auto fine = coarse;
  fine.n_theta = 200;
  const auto a = pbw::resolution_of_identity(pbw::example2(), f, g, 3.0, coarse);
  const auto b = pbw::resolution_of_identity(pbw::example2(), f, g, 3.0, fine);
  CHECK(std::abs(a.phi_psi - b.phi_psi) < 1e-13);
  CHECK_THROWS_AS(pbw::resolution_of_identity(pbw::example2(), f, g, 0.0), std::invalid_argument);
}
