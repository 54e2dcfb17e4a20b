#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pbw/jet.hpp"

namespace pbw::quad {

using Integrand = std::function<cplx(double)>;
using RealFunction = std::function<double(double)>;

struct IntegralResult {
  cplx value{};
  double abs_error_estimate = 0.0;
  int panels_used = 0;
  std::pair<double, double> truncation_bounds{0.0, 0.0};
};

/// Thrown when the panel budget runs out; carries the best estimate so far.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, IntegralResult best)
      : std::runtime_error(what), best_(best) {}
  const IntegralResult& best_estimate() const { return best_; }

 private:
  IntegralResult best_;
};

struct LineOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_panels = 10000;
  /// Explicit truncation interval. Takes precedence over `envelope`.
  std::optional<std::pair<double, double>> bounds;
  /// Upper bound for |f|; the line is truncated where it drops below
  /// abs_tol / 10. Without bounds or envelope the whole line is mapped
  /// onto (-1, 1) instead.
  RealFunction envelope;
  /// Extra panel edges inside the interval (kinks, narrow peaks).
  std::vector<double> breakpoints;
};

/// Adaptive Gauss-Kronrod (7/15) integration over [lo, hi].
IntegralResult integrate_interval(const Integrand& f, double lo, double hi, const LineOptions& opts = {});

/// Integral over the real line. See LineOptions for how the range is chosen.
IntegralResult integrate_line(const Integrand& f, const LineOptions& opts = {});

/// Smallest symmetric-ish interval outside which |f| stays below
/// `threshold`, found by scanning outward from `center` in steps of `step`.
/// Scanning on one side stops after |f| has been below threshold for a
/// stretch of `quiet_length`, or at `max_extent`.
std::pair<double, double> find_support(const RealFunction& magnitude, double threshold, double center = 0.0,
                                       double step = 1.0 / 16.0, double quiet_length = 4.0,
                                       double max_extent = 60.0);

/// Gauss-Legendre nodes and weights on [lo, hi].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Rule gauss_legendre(int n, double lo = -1.0, double hi = 1.0);

/// Integral of f over [0, x], returned as a jet of the antiderivative:
/// c_0 is the quadrature value, higher coefficients come from the
/// integrand's own jet.
Jet antiderivative_jet(const JetFunction& integrand, double x, int order);

}  // namespace pbw::quad
