#pragma once

#include <utility>
#include <vector>

#include "pbw/integrate.hpp"
#include "pbw/model.hpp"
#include "pbw/states.hpp"

namespace pbw {

/// Smooth compactly supported bump scale * exp(-1/(1 - t^2)), t = (x - center) / width.
class TestFunction {
 public:
  TestFunction(double center, double width, cplx scale = 1.0);

  double center() const { return center_; }
  double width() const { return width_; }
  cplx scale() const { return scale_; }
  std::pair<double, double> support() const { return {center_ - width_, center_ + width_}; }

  Jet eval(double x, int order) const;
  cplx operator()(double x) const;
  JetFunction as_jet_function() const;
  /// Same bump rescaled so that <h, h> = 1.
  TestFunction unit_normalized() const;

 private:
  double center_;
  double width_;
  cplx scale_;
};

/// rho at x: registered expression when the model has one, else the
/// numerical antiderivative of 1/alpha_a from 0.
double rho_eval(const PBModel& m, double x);

/// Solves rho(x) = s by bracketing plus safeguarded Newton steps to
/// |rho(x) - s| <= 1e-12 (1 + |s|). Throws std::domain_error when alpha is
/// not real or changes sign (rho not monotone).
double rho_invert(const PBModel& m, double s);

/// <f, g> = int conj(f) g dx.
quad::IntegralResult compatibility_form(const quad::Integrand& f, const quad::Integrand& g,
                                        const quad::LineOptions& opts = {});

/// <psi_m, phi_n> with the range taken from where the integrand decays.
quad::IntegralResult state_pairing(const StateFamily& psi, const StateFamily& phi, int m, int n);

struct BiorthoReport {
  std::vector<std::vector<cplx>> matrix;  // G[m][n] = <psi_m, phi_n>
  double max_deviation = 0.0;             // max |G - I|
};

BiorthoReport biorthonormality_matrix(const PBModel& m, int N, int jobs = 1);

enum class Transform { plus, minus };

/// Whether transform_pm is defined for the model.
bool has_transforms(const PBModel& m);

/// equal_alpha: h_-(s) = h(x) e^{s^2/2}, h_+(s) = h(x) alpha(x) e^{-s^2/2}, x = rho^{-1}(sqrt2 s).
/// sech_pair:   h_-(s) = h(x) e^{s^2/2}, h_+(s) = h(x) e^{-s^2/2} / sqrt(1 + s^2), x = asinh(s).
cplx transform_pm(const PBModel& m, const TestFunction& h, Transform sign, double s);

/// Image of the support of h in the s variable.
std::pair<double, double> transform_support(const PBModel& m, const TestFunction& h);

/// Normalized Hermite function e_n(s), by the three-term recurrence.
double oscillator_en(int n, double s);
/// e_0 .. e_N at s.
std::vector<double> oscillator_table(int N, double s);

/// <f, phi_n> (side phi) or <psi_n, g> (side psi) evaluated in the s
/// variable through the transforms and e_n:
///   equal_alpha: N_phi pi^{1/4} sqrt2 <f_+, e_n>,        conj(N_psi) pi^{1/4} sqrt2 <e_n, g_->
///   sech_pair:   N_phi pi^{1/4} / (sqrt(2^n) e) <f_+, e_n>, 2 conj(N_psi) sqrt(2^n sqrt pi) <e_n, g_->
cplx pairing_via_transform(const PBModel& m, const TestFunction& h, Side side, int n);

/// <f_+, g_->: equals <f, g> / sqrt2 for equal_alpha and <f, g> for sech_pair.
cplx transform_pairing(const PBModel& m, const TestFunction& f, const TestFunction& g);

enum class Ordering { phi_psi, psi_phi };

struct QuasiBasisTrace {
  std::vector<cplx> partial_sums;  // S_0 .. S_N
  std::vector<double> deviation;   // |S_k - <f, g>|
  cplx exact{};                    // <f, g>
  double final_deviation = 0.0;
  /// Transform cross-check: <f_+, g_-> scaled to <f, g> (NaN when the
  /// model has no transforms).
  cplx transform_value{};
  double transform_deviation = 0.0;
};

/// phi_psi: S_N = sum_{n<=N} <f, phi_n><psi_n, g>; psi_phi: sum <f, psi_n><phi_n, g>.
QuasiBasisTrace quasi_basis_sum(const PBModel& m, const TestFunction& f, const TestFunction& g, int N,
                                Ordering ordering, int jobs = 1);

}  // namespace pbw
