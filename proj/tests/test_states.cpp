#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pbw/model.hpp"
#include "pbw/states.hpp"

using pbw::cplx;
using pbw::Jet;
using pbw::PolySide;
using pbw::Side;

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

double rho1(double x) { return x + x * x * x / 3.0; }

}  // namespace

TEST_CASE("vacua of the worked examples") {
  const auto e1 = pbw::example1();
  const auto e2 = pbw::example2();
  const cplx n1 = std::conj(e1.norm_product);
  const cplx n2 = std::conj(e2.norm_product);
  for (double x : {-2.0, -0.4, 0.0, 1.1, 2.5}) {
    CHECK(std::abs(pbw::vacuum(e1, Side::phi, x, 0)[0] - std::exp(-rho1(x) * rho1(x) / 2.0)) < 1e-15);
    CHECK(std::abs(pbw::vacuum(e1, Side::psi, x, 0)[0] - n1 * (1.0 + x * x)) < 1e-14);
    CHECK(std::abs(pbw::vacuum(e2, Side::psi, x, 0)[0] - 2.0 * n2 * std::cosh(x)) < 1e-13);
  }
}

TEST_CASE("recursion base cases and small levels") {
  for (const auto& name : pbw::builtin_names()) {
    const auto m = pbw::build_builtin(name);
    CHECK(std::abs(pbw::pi_sigma_recursive(m, PolySide::pi, 0, 0.3, 2)[0] - 1.0) < 1e-16);
    CHECK(std::abs(pbw::pi_sigma_recursive(m, PolySide::sigma, 0, 0.3, 2)[0] - 1.0) < 1e-16);
  }
  // equal alpha: pi_2 = rho^2 - 1
  const auto e1 = pbw::example1();
  for (double x : {-1.5, 0.0, 0.8}) {
    CHECK(std::abs(pbw::pi_sigma_recursive(e1, PolySide::pi, 2, x, 0)[0] - (rho1(x) * rho1(x) - 1.0)) < 1e-13);
  }
  // example2: sigma_1 = 2 sinh x
  const auto e2 = pbw::example2();
  for (double x : {-1.5, 0.0, 0.8})
    CHECK(std::abs(pbw::pi_sigma_recursive(e2, PolySide::sigma, 1, x, 0)[0] - 2.0 * std::sinh(x)) < 1e-14);

  CHECK_THROWS_AS(pbw::pi_sigma_recursive(e2, PolySide::pi, 30, 0.0, 20), pbw::CapacityError);
}

TEST_CASE("closed forms against special-function oracle") {
  const auto e2 = pbw::example2();
  for (double x : {-1.2, 0.0, 0.5, 1.9}) {
    const double h3 = std::hermite(3, std::sinh(x));
    CHECK(std::abs(pbw::pi_sigma_closed(e2, PolySide::pi, 3, x, 0)[0] - h3 / 8.0) < 1e-13 * (1.0 + std::abs(h3)));
    CHECK(std::abs(pbw::pi_sigma_closed(e2, PolySide::sigma, 3, x, 0)[0] - h3) < 1e-13 * (1.0 + std::abs(h3)));
  }
  const auto c = pbw::constant_alpha(1.0, 1.0, 0.0);
  for (double x : {-2.0, 0.3, 1.7}) {
    CHECK(std::abs(pbw::pi_sigma_closed(c, PolySide::pi, 1, x, 0)[0] - x) < 1e-15);
    CHECK(std::abs(pbw::pi_sigma_closed(c, PolySide::pi, 0, x, 0)[0] - 1.0) < 1e-16);
  }
  CHECK_THROWS_AS(pbw::pi_sigma_closed(pbw::from_expressions("1", "x", "1", "0"), PolySide::pi, 1, 0.0, 0),
                  std::invalid_argument);
}

TEST_CASE("closed form and recursion agree") {
  std::vector<pbw::PBModel> models = {pbw::example1(), pbw::example2(), pbw::bosonic(),
                                      pbw::constant_alpha(cplx(2.0, 0.5), cplx(0.5, -0.1), cplx(0.3, -0.2)),
                                      pbw::shifted(0.5, cplx(0.0, 0.25)), pbw::swanson(0.4)};
  const auto grid = pbw::linspace(-4.0, 4.0, 81);
  for (const auto& m : models) {
    REQUIRE(pbw::has_closed_form(m));
    for (int n = 0; n <= 15; ++n) {
      for (PolySide side : {PolySide::pi, PolySide::sigma}) {
        double worst = 0.0;
        for (double x : grid) {
          const cplx closed = pbw::pi_sigma_closed(m, side, n, x, 0)[0];
          const cplx rec = pbw::pi_sigma_recursive(m, side, n, x, 0)[0];
          worst = std::max(worst, std::abs(closed - rec) / (1.0 + std::abs(closed)));
        }
        INFO(m.name << " n=" << n);
        CHECK(worst <= 1e-9);
      }
    }
  }
}

TEST_CASE("hermite induction step at the substituted argument") {
  // For example1, pi_n = 2^{-n/2} H_n(y), y = rho/sqrt2, and pi_n = 2^{-n/2}(2y H_{n-1}(y) - H'_{n-1}(y)).
  const auto e1 = pbw::example1();
  for (int n = 1; n <= 12; ++n) {
    for (double x : {-1.3, 0.2, 1.1}) {
      const double y = rho1(x) / std::numbers::sqrt2;
      const double step = 2.0 * y * std::hermite(n - 1, y) - (n >= 2 ? 2.0 * (n - 1) * std::hermite(n - 2, y) : 0.0);
      const cplx pin = pbw::pi_sigma_recursive(e1, PolySide::pi, n, x, 0)[0];
      CHECK(std::abs(pin - std::pow(2.0, -0.5 * n) * step) <= 1e-10 * (1.0 + std::abs(step)));
    }
  }
}

TEST_CASE("constant alpha pi_n is a polynomial of degree n") {
  const auto c = pbw::constant_alpha(cplx(2.0, 0.5), cplx(0.5, -0.1), 0.3);
  for (int n = 0; n <= 10; ++n) {
    const Jet p = pbw::pi_sigma_closed(c, PolySide::pi, n, 0.0, n + 4);
    CHECK(std::abs(p[n]) > 1e-12);
    for (int k = n + 1; k <= n + 4; ++k) CHECK(std::abs(p[k]) < 1e-12 * (1.0 + std::abs(p[n])));
  }
}

TEST_CASE("state families of the worked examples") {
  const auto e1 = pbw::example1();
  const auto e2 = pbw::example2();
  const pbw::StateFamily phi1(e1, Side::phi);
  const pbw::StateFamily psi2(e2, Side::psi);
  const cplx n2 = std::conj(e2.norm_product);
  for (int n : {0, 1, 4, 9}) {
    for (double x : {-1.1, 0.0, 0.6}) {
      const double r = rho1(x);
      const double want1 = std::hermite(n, r / std::numbers::sqrt2) * std::exp(-r * r / 2.0) /
                           std::sqrt(std::pow(2.0, n) * factorial(n));
      CHECK(std::abs(pbw::eval_state(phi1, n, x, 0)[0] - want1) <= 1e-13 * (1.0 + std::abs(want1)));
      const cplx want2 = 2.0 * n2 * std::hermite(n, std::sinh(x)) * std::cosh(x) / std::sqrt(factorial(n));
      CHECK(std::abs(pbw::eval_state(psi2, n, x, 0)[0] - want2) <= 1e-13 * (1.0 + std::abs(want2)));
    }
  }
  CHECK(std::abs(pbw::eval_state(phi1, 0, 0.7, 0)[0] - pbw::vacuum(e1, Side::phi, 0.7, 0)[0]) < 1e-16);
  CHECK_THROWS_AS(phi1.eval(21, 0.0, 0), std::out_of_range);
  CHECK(psi2.normalization() == n2);
  // closed and recursive state paths agree
  for (double x : {-2.0, 0.5})
    CHECK(std::abs(psi2.eval(7, x, 0)[0] - psi2.eval_recursive(7, x, 0)[0]) < 1e-9 * (1.0 + std::abs(psi2.eval(7, x, 0)[0])));
}

TEST_CASE("normalization constants") {
  CHECK(std::abs(pbw::fix_normalization(pbw::example1()) - 1.0 / std::sqrt(2.0 * std::numbers::pi)) < 1e-12);
  CHECK(std::abs(pbw::fix_normalization(pbw::example2()) - std::numbers::e / (2.0 * std::sqrt(std::numbers::pi))) <
        1e-12);
  CHECK(std::abs(pbw::fix_normalization(pbw::bosonic()) - 1.0 / std::sqrt(std::numbers::pi)) < 1e-12);
  for (const auto& name : pbw::builtin_names()) {
    const auto m = pbw::build_builtin(name);
    INFO(name);
    CHECK(std::abs(pbw::fix_normalization(m) - m.norm_product) < 1e-10 * std::abs(m.norm_product));
  }
  // the numerical vacuum of a general model reproduces the bosonic value
  const auto g = pbw::from_expressions("1/sqrt(2)", "x/sqrt(2)", "1/sqrt(2)", "x/sqrt(2)");
  CHECK(std::abs(pbw::fix_normalization(g) - 1.0 / std::sqrt(std::numbers::pi)) < 1e-10);
}

TEST_CASE("ladder relations on the families") {
  const auto grid = pbw::linspace(-3.0, 3.0, 61);
  const auto a0 = pbw::verify_ladder(pbw::example1(), 0, grid);
  CHECK(a0.a_phi < 1e-12);
  CHECK(pbw::verify_ladder(pbw::example2(), 3, grid).max_relative() <= 1e-8);
  CHECK(pbw::verify_ladder(pbw::bosonic(), 5, grid).max_relative() <= 1e-10);
  for (const auto& name : pbw::builtin_names()) {
    INFO(name);
    for (int n : {1, 6}) CHECK(pbw::verify_ladder(pbw::build_builtin(name), n, grid).max_relative() <= 1e-8);
  }
}

TEST_CASE("general-flavor recursion matches the proportional-alpha shortcut") {
  const auto e2 = pbw::example2();
  auto g = e2;
  g.flavor = pbw::Flavor::general;
  for (int n = 0; n <= 8; ++n)
    for (PolySide side : {PolySide::pi, PolySide::sigma})
      for (double x : {-2.0, -0.3, 0.9}) {
        const cplx want = pbw::pi_sigma_recursive(e2, side, n, x, 0)[0];
        CHECK(std::abs(pbw::pi_sigma_recursive(g, side, n, x, 0)[0] - want) <= 1e-10 * (1.0 + std::abs(want)));
      }
}
