#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pbw/model.hpp"
#include "pbw/states.hpp"

namespace pbw {

enum class HSide { H, H_dag };

/// H = -c2 d^2/dx^2 + c1 d/dx + c0 with
///   H = ba:          c2 = alpha_a alpha_b
///                    c1 = alpha_a beta_b - alpha_b beta_a - 2 alpha_a alpha_b'
///                    c0 = beta_a beta_b - (beta_a alpha_b)'
///   H^dag = a^dag b^dag: conjugates of
///                    c2 = alpha_a alpha_b
///                    c1 = alpha_b beta_a - alpha_a beta_b - 2 alpha_b alpha_a'
///                    c0 = beta_a beta_b - (beta_b alpha_a)'
class HamiltonianCoeffs {
 public:
  HamiltonianCoeffs(PBModel model, HSide side) : model_(std::move(model)), side_(side) {}

  HSide side() const { return side_; }
  /// {c2, c1, c0} at x.
  std::array<cplx, 3> at(double x) const;

 private:
  PBModel model_;
  HSide side_;
};

HamiltonianCoeffs hamiltonian_coeffs(const PBModel& m, HSide side);

/// (H f)(x) or (H^dag f)(x); f is expanded to order 2.
cplx apply_hamiltonian(const PBModel& m, HSide side, const JetFunction& f, double x);
cplx apply_hamiltonian(const HamiltonianCoeffs& h, const JetFunction& f, double x);

/// sup |(H - n) phi_n| / sup |phi_n| (H side) or the same for H^dag and psi_n.
/// Points where the state magnitude is below 1e-250 are skipped.
double eigen_residual(const PBModel& m, HSide side, int n, std::span<const double> grid);

/// sup |(ab) phi_n - (n+1) phi_n| / sup |phi_n| on the H side,
/// sup |(b^dag a^dag) psi_n - (n+1) psi_n| / sup |psi_n| on the H^dag side.
double hsusy_shift_check(const PBModel& m, int n, std::span<const double> grid, HSide side = HSide::H);

struct CrosscheckReport {
  std::string name;
  /// Max deviation per coefficient in the order k2, k1, k0, q2, q1, q0.
  std::array<double, 6> deviation{};
  double max_deviation = 0.0;
};

/// Names with hard-coded printed Hamiltonians: constant_k, example1, example2.
std::vector<std::string> printed_hamiltonian_names();

/// Compares the printed coefficient formulas with the derived ones on the
/// grid. constant_k uses alpha_a = alpha_b = 1, beta_a = x, beta_b = k.
CrosscheckReport builtin_hamiltonian_crosscheck(std::string_view name, std::span<const double> grid, double k = 0.3);

}  // namespace pbw
