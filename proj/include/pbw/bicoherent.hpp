#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "pbw/model.hpp"
#include "pbw/pairings.hpp"

namespace pbw {

/// Growth data of a pseudo-bosonic family: alpha_0 = 0 < alpha_1 < ...,
/// alpha_bar = lim alpha_n, and the constants of the bounds
/// |phi_n| <= A_phi r_phi^n M_n(phi), |psi_n| <= A_psi r_psi^n M_n(psi).
struct GrowthProfile {
  std::function<double(int)> alpha;
  double alpha_bar = std::numeric_limits<double>::infinity();
  double A_phi = 1.0, A_psi = 1.0;
  double r_phi = 1.0, r_psi = 1.0;
  double M_phi = 1.0, M_psi = 1.0;  // limits of the M_n sequences

  /// alpha_k! = alpha_1 alpha_2 ... alpha_k, with alpha_0! = 1.
  double alpha_factorial(int k) const;
  double log_alpha_factorial(int k) const;
};

/// alpha_n = sqrt(n), unbounded, unit constants.
GrowthProfile pseudo_bosonic_profile();

/// alpha_bar * min(1, M_phi / r_phi, M_psi / r_psi); infinite when alpha_bar
/// is infinite and both ratios are positive.
double convergence_radius(const GrowthProfile& p);

/// (sum_k |z|^{2k} / (alpha_k!)^2)^{-1/2}. Throws std::domain_error when
/// |z| is not below the radius.
double coherent_norm(double z_abs, const GrowthProfile& p);

/// int r^{2k} lambda'(r) dr - (alpha_k!)^2 / (2 pi) for k = 0..k_max, over
/// [0, radius).
struct MomentRow {
  int k = 0;
  double moment = 0.0;
  double expected = 0.0;
  double deviation = 0.0;  // moment - expected
  double relative = 0.0;   // |deviation| / expected
};
std::vector<MomentRow> moment_check(const quad::RealFunction& radial_density, const GrowthProfile& p, int k_max);

enum class Coherent { Phi, Psi };

struct WeakStateQuery {
  cplx z{};
  Coherent side = Coherent::Phi;
  int max_terms = 60;
  double tail_tol = 1e-12;
};

struct WeakPairing {
  cplx value{};
  int terms = 0;
  double tail_bound = 0.0;
  /// True when the bound comes from the transform estimates; otherwise it is
  /// extrapolated from the last computed terms.
  bool rigorous = false;
};

/// Upper bound on |<phi_n, g>| (Phi) or |<psi_n, g>| (Psi) from the transform
/// identities. Defined for models with transforms.
double coefficient_bound(const PBModel& m, Coherent side, const TestFunction& g, int n);

/// <Phi(z), g> = e^{-|z|^2/2} sum_n conj(z)^n / sqrt(n!) <phi_n, g> (and Psi with psi_n),
/// truncated once the tail bound is below tail_tol or at max_terms.
WeakPairing weak_pairing(const PBModel& m, const WeakStateQuery& q, const TestFunction& g);

/// Relative residuals of <a^dag g, Phi(z)> = z <g, Phi(z)> and <b g, Psi(z)> = z <g, Psi(z)>.
struct EigenRelation {
  cplx lhs_phi{}, rhs_phi{};
  cplx lhs_psi{}, rhs_psi{};
  double residual_phi = 0.0;  // |lhs - rhs| / max(|rhs|, tiny)
  double residual_psi = 0.0;
};
EigenRelation eigen_relation_residual(const PBModel& m, cplx z, const TestFunction& g, int terms = 60);
/// Same for several z, sharing the coefficient integrals.
std::vector<EigenRelation> eigen_relation_residuals(const PBModel& m, std::span<const cplx> zs, const TestFunction& g,
                                                    int terms = 60);

struct ResolutionOptions {
  int n_r = 20;          // Gauss nodes per radial panel (in t = r^2)
  double panel = 2.0;    // radial panel length in t
  int n_theta = 0;       // angular nodes; 0 means 2N + 1
  int terms = 0;         // series truncation N; 0 means chosen from R
  std::vector<double> trace_radii;  // extra radii reported in the trace
  int jobs = 1;
};

struct ResolutionTracePoint {
  double R = 0.0;
  cplx phi_psi{}, psi_phi{};
  double deviation_phi_psi = 0.0, deviation_psi_phi = 0.0;
};

struct ResolutionResult {
  double R = 0.0;
  int terms = 0;
  int n_theta = 0;
  cplx phi_psi{};  // (1/pi) int <f, Phi(z)><Psi(z), g> dz
  cplx psi_phi{};  // (1/pi) int <f, Psi(z)><Phi(z), g> dz
  cplx exact{};    // <f, g>
  /// sum_n A_n B_n P(n+1, R^2): the radial integral done analytically.
  cplx series_phi_psi{}, series_psi_phi{};
  /// Change of the result when the angular rule is doubled.
  double angular_change = 0.0;
  std::vector<ResolutionTracePoint> trace;
};

/// Smallest N with Poisson(R^2) mass beyond N below 1e-20, at least 60.
int terms_for_radius(double R);

ResolutionResult resolution_of_identity(const PBModel& m, const TestFunction& f, const TestFunction& g, double R,
                                        const ResolutionOptions& opts = {});

/// Closed-form coherent state of the ordinary oscillator:
/// pi^{-1/4} exp(-x^2/2 + sqrt2 z x - z^2/2 - |z|^2/2).
cplx classical_coherent_state(cplx z, double x);

}  // namespace pbw
