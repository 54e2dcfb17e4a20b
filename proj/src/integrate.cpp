#include "pbw/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

namespace pbw::quad {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Kronrod 15-point abscissae (non-negative half) and weights; the odd
// entries 1, 3, 5, 7 are the embedded 7-point Gauss nodes.
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo, hi;
  cplx value;
  double error;
  double floor;  // roundoff floor of the error estimate
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel kronrod15(const Integrand& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const cplx fc = f(center);
  cplx resk = fc * kWgk[7];
  cplx resg = fc * kWg[3];
  double resabs = std::abs(fc) * kWgk[7];
  cplx fv1[7], fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    fv1[j] = f(center - dx);
    fv2[j] = f(center + dx);
    resk += kWgk[j] * (fv1[j] + fv2[j]);
    resabs += kWgk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * (fv1[j] + fv2[j]);
  }
  const cplx mean = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(fv1[j] - mean) + std::abs(fv2[j] - mean));

  const double ahalf = std::abs(half);
  resabs *= ahalf;
  resasc *= ahalf;
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double floor = 50.0 * kEps * resabs;
  err = std::max(err, floor);
  if (!std::isfinite(err) || !std::isfinite(std::abs(resk))) {
    std::ostringstream msg;
    msg << "non-finite integrand on [" << lo << ", " << hi << "]";
    throw std::domain_error(msg.str());
  }
  return Panel{lo, hi, resk * half, err, floor};
}

double target(const LineOptions& opts, cplx total) {
  return std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
}

IntegralResult adaptive(const Integrand& f, std::vector<double> edges, const LineOptions& opts) {
  std::priority_queue<Panel> active;
  std::vector<Panel> settled;
  cplx total{};
  double total_err = 0.0;
  double total_floor = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (edges[i + 1] <= edges[i]) continue;
    Panel p = kronrod15(f, edges[i], edges[i + 1]);
    total += p.value;
    total_err += p.error;
    total_floor += p.floor;
    active.push(p);
  }
  int panels = static_cast<int>(active.size());

  // Stop once the estimate is within a small multiple of the summed roundoff
  // floors: cancellation between panels makes anything tighter unreachable.
  while (!active.empty() && total_err > std::max(target(opts, total), 4.0 * total_floor)) {
    Panel worst = active.top();
    active.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const bool too_narrow = (worst.hi - worst.lo) <= 64.0 * kEps * std::max(std::abs(mid), 1.0);
    if (worst.error <= worst.floor * 1.0000001 || too_narrow) {
      settled.push_back(worst);
      continue;
    }
    if (panels >= opts.max_panels) {
      active.push(worst);
      IntegralResult best{total, total_err, panels, {edges.front(), edges.back()}};
      std::ostringstream msg;
      msg << "integration did not converge within " << opts.max_panels << " panels (error estimate " << total_err
          << ")";
      throw IntegrationError(msg.str(), best);
    }
    Panel left = kronrod15(f, worst.lo, mid);
    Panel right = kronrod15(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    total_floor += left.floor + right.floor - worst.floor;
    active.push(left);
    active.push(right);
    ++panels;
  }

  // Re-sum from the panels to shed accumulated update roundoff.
  cplx sum{};
  double err = 0.0;
  for (const auto& p : settled) {
    sum += p.value;
    err += p.error;
  }
  while (!active.empty()) {
    sum += active.top().value;
    err += active.top().error;
    active.pop();
  }
  return IntegralResult{sum, err, panels, {edges.front(), edges.back()}};
}

std::vector<double> panel_edges(double lo, double hi, const std::vector<double>& breakpoints) {
  std::vector<double> edges{lo};
  for (double b : breakpoints)
    if (b > lo && b < hi) edges.push_back(b);
  edges.push_back(hi);
  std::sort(edges.begin(), edges.end());
  return edges;
}

double envelope_cutoff(const RealFunction& envelope, double threshold, double direction) {
  double inner = 0.0;
  double outer = direction;
  int doublings = 0;
  while (envelope(outer) >= threshold) {
    inner = outer;
    outer *= 2.0;
    if (++doublings > 60) throw std::domain_error("decay envelope is not integrable");
  }
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (inner + outer);
    if (envelope(mid) >= threshold)
      inner = mid;
    else
      outer = mid;
  }
  return outer;
}

}  // namespace

IntegralResult integrate_interval(const Integrand& f, double lo, double hi, const LineOptions& opts) {
  if (!(lo < hi)) {
    if (lo == hi) return IntegralResult{0.0, 0.0, 0, {lo, hi}};
    IntegralResult r = integrate_interval(f, hi, lo, opts);
    r.value = -r.value;
    r.truncation_bounds = {lo, hi};
    return r;
  }
  return adaptive(f, panel_edges(lo, hi, opts.breakpoints), opts);
}

IntegralResult integrate_line(const Integrand& f, const LineOptions& opts) {
  if (opts.bounds) return integrate_interval(f, opts.bounds->first, opts.bounds->second, opts);
  if (opts.envelope) {
    const double threshold = opts.abs_tol / 10.0;
    const double lo = envelope_cutoff(opts.envelope, threshold, -1.0);
    const double hi = envelope_cutoff(opts.envelope, threshold, 1.0);
    return integrate_interval(f, lo, hi, opts);
  }
  // x = t / (1 - t^2) maps (-1, 1) onto the line.
  double lo_seen = 0.0, hi_seen = 0.0;
  auto mapped = [&](double t) -> cplx {
    const double d = 1.0 - t * t;
    const double x = t / d;
    lo_seen = std::min(lo_seen, x);
    hi_seen = std::max(hi_seen, x);
    const cplx v = f(x);
    if (v == cplx{}) return v;
    return v * ((1.0 + t * t) / (d * d));
  };
  std::vector<double> edges{-1.0};
  for (double b : opts.breakpoints) edges.push_back(2.0 * b / (1.0 + std::sqrt(1.0 + 4.0 * b * b)));
  edges.push_back(0.0);
  edges.push_back(1.0);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  IntegralResult r = adaptive(mapped, edges, opts);
  r.truncation_bounds = {lo_seen, hi_seen};
  return r;
}

std::pair<double, double> find_support(const RealFunction& magnitude, double threshold, double center, double step,
                                       double quiet_length, double max_extent) {
  auto scan = [&](double dir) {
    double last_loud = 0.0;
    for (double d = 0.0; d <= max_extent; d += step) {
      const double m = magnitude(center + dir * d);
      if (!(m < threshold)) {
        last_loud = d;
      } else if (d - last_loud >= quiet_length) {
        break;
      }
    }
    return center + dir * (last_loud + step);
  };
  return {scan(-1.0), scan(1.0)};
}

Rule gauss_legendre(int n, double lo, double hi) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre rule needs at least one node");
  Rule rule{std::vector<double>(static_cast<std::size_t>(n)), std::vector<double>(static_cast<std::size_t>(n))};
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    const auto a = static_cast<std::size_t>(i);
    const auto b = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[a] = mid - half * z;
    rule.nodes[b] = mid + half * z;
    rule.weights[a] = half * w;
    rule.weights[b] = half * w;
  }
  return rule;
}

Jet antiderivative_jet(const JetFunction& integrand, double x, int order) {
  LineOptions opts;
  opts.abs_tol = 1e-15;
  opts.rel_tol = 1e-14;
  const auto value = integrate_interval([&](double t) { return integrand(t, 0).value(); }, 0.0, x, opts).value;
  std::vector<cplx> c(static_cast<std::size_t>(order) + 1);
  c[0] = value;
  if (order > 0) {
    const Jet f = integrand(x, order - 1);
    for (int k = 1; k <= order; ++k) c[static_cast<std::size_t>(k)] = f[k - 1] / static_cast<double>(k);
  }
  return Jet(x, std::move(c));
}

}  // namespace pbw::quad
