#pragma once

#include <span>

#include "pbw/jet.hpp"
#include "pbw/model.hpp"

namespace pbw {

enum class Side { phi, psi };
enum class PolySide { pi, sigma };

/// Thrown when a recursion would need jets beyond the configured order.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vacuum without its normalization constant:
///   phi: exp(-int beta_a / alpha_a),  psi: exp(-int conj(beta_b) / conj(alpha_b)).
Jet vacuum_shape(const PBModel& m, Side side, double x, int order);

/// phi_0 (with N_phi = 1) or psi_0 (with N_psi = conj(norm_product)).
Jet vacuum(const PBModel& m, Side side, double x, int order);

/// pi_n = (theta/alpha_a - alpha_b') pi_{n-1} - alpha_b pi_{n-1}'
/// sigma_n = conj(theta/alpha_b - alpha_a') sigma_{n-1} - conj(alpha_a) sigma_{n-1}'
/// starting from pi_0 = sigma_0 = 1. Level k is carried at order order + n - k.
Jet pi_sigma_recursive(const PBModel& m, PolySide side, int n, double x, int order,
                       int max_order = kDefaultMaxOrder);

/// Whether pi_sigma_closed supports this model.
bool has_closed_form(const PBModel& m);

/// Hermite closed forms:
///   constant_alpha: pi_n = r^n H_n((x + k) / s), s = sqrt(2 alpha_a alpha_b), r = alpha_b / s
///                   sigma_n likewise with a and b swapped and everything conjugated
///   equal_alpha:    pi_n = 2^(-n/2) H_n(rho / sqrt 2)
///   sech_pair:      pi_n = 2^(-n) H_n(sinh x), sigma_n = H_n(sinh x)
Jet pi_sigma_closed(const PBModel& m, PolySide side, int n, double x, int order);

/// Lazily evaluated phi_n or psi_n family of one model.
class StateFamily {
 public:
  StateFamily(PBModel model, Side side, int max_n = 20);

  const PBModel& model() const { return model_; }
  Side side() const { return side_; }
  int max_n() const { return max_n_; }
  /// N_phi = 1 on the phi side, N_psi = conj(norm_product) on the psi side.
  cplx normalization() const;

  /// phi_n = pi_n phi_0 / sqrt(n!), psi_n = sigma_n psi_0 / sqrt(n!).
  /// Uses the closed form when the flavor has one.
  Jet eval(int n, double x, int order) const;
  /// Same, always through the recursion.
  Jet eval_recursive(int n, double x, int order) const;
  JetFunction state(int n) const;

 private:
  PBModel model_;
  Side side_;
  int max_n_;
};

inline Jet eval_state(const StateFamily& fam, int n, double x, int order) { return fam.eval(n, x, order); }

/// 1 / <psi_0, phi_0> computed with conj(N_psi) N_phi = 1.
cplx fix_normalization(const PBModel& m);

/// Copy of m with norm_product taken from fix_normalization.
PBModel normalized(PBModel m);

/// Sup-norm residuals of the four ladder relations at level n.
struct LadderResiduals {
  double b_phi = 0.0;      // b phi_n - sqrt(n+1) phi_{n+1}
  double a_phi = 0.0;      // a phi_n - sqrt(n) phi_{n-1}
  double a_dag_psi = 0.0;  // a^dag psi_n - sqrt(n+1) psi_{n+1}
  double b_dag_psi = 0.0;  // b^dag psi_n - sqrt(n) psi_{n-1}
  double phi_scale = 0.0;  // sup |phi_n| on the grid
  double psi_scale = 0.0;  // sup |psi_n| on the grid

  double max_relative() const;
};

LadderResiduals verify_ladder(const PBModel& m, int n, std::span<const double> grid);

}  // namespace pbw
