#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pbw/expr.hpp"
#include "pbw/jet.hpp"

namespace pbw {

/// Which closed forms a model admits.
///   constant_alpha: alpha_a, alpha_b constant, theta(x) = x + k.
///   equal_alpha:    alpha_a = alpha_b = alpha(x), beta_a = rho, beta_b = alpha'.
///   sech_pair:      alpha_a = 2 alpha_b = sech(x), beta_a = 2 sinh(x),
///                   beta_b = alpha_b'.
enum class Flavor { general, constant_alpha, equal_alpha, sech_pair };

struct ConstantAlpha {
  cplx alpha_a;
  cplx alpha_b;
  cplx k;
};

/// First-order ladder pair
///   a = alpha_a d/dx + beta_a,   b = -d/dx alpha_b + beta_b
/// with formal adjoints
///   a^dag = -d/dx conj(alpha_a) + conj(beta_a),   b^dag = conj(alpha_b) d/dx + conj(beta_b).
struct PBModel {
  std::string name;
  Expr alpha_a = Expr::constant(1.0);
  Expr beta_a = Expr::x();
  Expr alpha_b = Expr::constant(1.0);
  Expr beta_b = Expr::constant(0.0);
  Flavor flavor = Flavor::general;
  std::optional<ConstantAlpha> constant;
  /// Antiderivative of 1/alpha (equal_alpha) or 1/alpha_b (sech_pair).
  std::optional<Expr> rho;
  std::function<double(double)> rho_inverse_closed;
  /// log(phi_0 / N_phi) in closed form, when known.
  std::optional<Expr> phi0_exponent;
  /// psi_0 / N_psi in closed form, when known.
  std::optional<Expr> psi0_shape;
  /// conj(N_psi) * N_phi. Individual factors are N_phi = 1 and
  /// N_psi = conj(norm_product).
  cplx norm_product = 1.0;
};

PBModel with_norm_product(PBModel m, cplx product);

/// theta = alpha_a beta_b + alpha_b beta_a.
Jet theta_jet(const PBModel& m, double x, int order);

struct ConditionReport {
  std::vector<double> grid;
  /// alpha_a alpha_b' - alpha_a' alpha_b
  std::vector<cplx> residual1;
  /// alpha_a beta_b' + alpha_b beta_a' - 1 - alpha_a alpha_b''
  std::vector<cplx> residual2;
  double max_abs1 = 0.0;
  double max_abs2 = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

ConditionReport check_pb_conditions(const PBModel& m, std::span<const double> grid, double tol = 1e-10);

enum class Ladder { a, b, a_dag, b_dag };

/// Jet of (L f) at x to the requested order; f is expanded to order + 1.
Jet apply_ladder(const PBModel& m, Ladder which, const JetFunction& f, double x, int order);

/// L f as a jet function, for composing operators.
JetFunction ladder(const PBModel& m, Ladder which, JetFunction f);

struct ResidualStats {
  double max_abs = 0.0;
  double at_x = 0.0;
};

/// sup over the grid of |(ab - ba) f - f|.
ResidualStats commutator_residual(const PBModel& m, const JetFunction& f, std::span<const double> grid);

/// Symbolic derivative (no simplification beyond constant folding).
Expr differentiate(const Expr& e);

std::vector<double> linspace(double lo, double hi, int points);

// Built-in models.

PBModel bosonic();
/// a = c + alpha, b = c^dag + beta.
PBModel shifted(cplx alpha, cplx beta);
PBModel swanson(double theta);
/// Constant alpha_a, alpha_b with beta_a = x / alpha_b, beta_b = k / alpha_a.
PBModel constant_alpha(cplx alpha_a, cplx alpha_b, cplx k);
/// alpha(x) = 1 / (1 + x^2).
PBModel example1();
/// alpha_a(x) = 2 alpha_b(x) = 1 / cosh(x).
PBModel example2();

/// Dispatch by name: bosonic, shifted(alpha, beta), swanson(theta),
/// constant_alpha(alpha_a, alpha_b, k), example1, example2. Missing
/// parameters take documented defaults.
PBModel build_builtin(std::string_view name, std::span<const cplx> params = {});
std::vector<std::string> builtin_names();

/// Model from raw coefficient expressions (general flavor). Vacua and
/// normalization are computed numerically.
PBModel from_expressions(std::string_view alpha_a, std::string_view beta_a, std::string_view alpha_b,
                         std::string_view beta_b, const AntiderivRegistry* registry = nullptr);

/// Equal-alpha model: beta_a = antideriv(1/alpha), beta_b = alpha'.
PBModel equal_alpha(std::string_view alpha, const AntiderivRegistry* registry = nullptr);

}  // namespace pbw
