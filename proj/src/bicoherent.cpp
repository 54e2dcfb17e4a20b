#include "pbw/bicoherent.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "pbw/parallel.hpp"

namespace pbw {

namespace {

constexpr double kAbsTol = 1e-13;
constexpr double kRelTol = 1e-12;

quad::LineOptions support_options(std::pair<double, double> bounds) {
  quad::LineOptions opts;
  opts.bounds = bounds;
  opts.abs_tol = kAbsTol;
  opts.rel_tol = kRelTol;
  return opts;
}

/// <u, v> over the support of the bump that is not evaluated through a state.
cplx pair_left(const TestFunction& f, const StateFamily& fam, int n) {
  return quad::integrate_line([&](double x) { return std::conj(f(x)) * fam.eval(n, x, 0)[0]; },
                              support_options(f.support()))
      .value;
}

cplx pair_right(const StateFamily& fam, int n, const TestFunction& g) {
  return quad::integrate_line([&](double x) { return std::conj(fam.eval(n, x, 0)[0]) * g(x); },
                              support_options(g.support()))
      .value;
}

cplx exact_pairing(const TestFunction& f, const TestFunction& g) {
  const double lo = std::max(f.support().first, g.support().first);
  const double hi = std::min(f.support().second, g.support().second);
  if (!(lo < hi)) return 0.0;
  return quad::integrate_line([&](double x) { return std::conj(f(x)) * g(x); }, support_options({lo, hi})).value;
}

/// e^{-|z|^2/2} sum_n c_n w^n / sqrt(n!) for n = 0..N.
cplx coherent_series(const std::vector<cplx>& c, cplx w, int N) {
  cplx weight = std::exp(-0.5 * std::norm(w));
  cplx sum = weight * c[0];
  for (int n = 1; n <= N; ++n) {
    weight *= w / std::sqrt(static_cast<double>(n));
    sum += weight * c[static_cast<std::size_t>(n)];
  }
  return sum;
}

double transform_norm(const PBModel& m, const TestFunction& g, Transform sign) {
  const auto r = quad::integrate_line([&](double s) { return std::norm(transform_pm(m, g, sign, s)); },
                                      support_options(transform_support(m, g)));
  return std::sqrt(r.value.real());
}

/// log of e^{-r^2/2} r^k / sqrt(k!) C_k with C_k = c * 2^{slope k / 2}.
double log_tail_term(double r, int k, double log_c, double slope) {
  return -0.5 * r * r + k * std::log(r) - 0.5 * std::lgamma(k + 1.0) + 0.5 * slope * k * std::numbers::ln2 + log_c;
}

/// sum_{k > n} of the bound terms.
double tail_from(double r, int n, double log_c, double slope) {
  if (r == 0.0) return 0.0;
  double sum = 0.0;
  double peak = -std::numeric_limits<double>::infinity();
  const double mode = r * r * std::pow(2.0, slope);
  for (int k = n + 1; k < n + 20000; ++k) {
    const double lt = log_tail_term(r, k, log_c, slope);
    peak = std::max(peak, lt);
    sum += std::exp(lt);
    if (k > mode && lt < peak - 50.0) break;
  }
  return sum;
}

}  // namespace

double GrowthProfile::log_alpha_factorial(int k) const {
  double s = 0.0;
  for (int j = 1; j <= k; ++j) s += std::log(alpha(j));
  return s;
}

double GrowthProfile::alpha_factorial(int k) const { return std::exp(log_alpha_factorial(k)); }

GrowthProfile pseudo_bosonic_profile() {
  GrowthProfile p;
  p.alpha = [](int n) { return std::sqrt(static_cast<double>(n)); };
  return p;
}

double convergence_radius(const GrowthProfile& p) {
  const double ratio = std::min({1.0, p.M_phi / p.r_phi, p.M_psi / p.r_psi});
  if (ratio <= 0.0) return 0.0;
  if (std::isinf(p.alpha_bar)) return std::numeric_limits<double>::infinity();
  return p.alpha_bar * ratio;
}

double coherent_norm(double z_abs, const GrowthProfile& p) {
  const double radius = convergence_radius(p);
  if (!(z_abs < radius)) throw std::domain_error("|z| is outside the convergence radius");
  if (z_abs == 0.0) return 1.0;
  // Log-sum-exp over log(|z|^{2k} / (alpha_k!)^2).
  const double lz = std::log(z_abs);
  double peak = 0.0, scaled = 1.0, log_fact = 0.0, prev = 0.0;
  for (int k = 1; k < 10000000; ++k) {
    log_fact += std::log(p.alpha(k));
    const double lt = 2.0 * k * lz - 2.0 * log_fact;
    if (lt > peak) {
      scaled = scaled * std::exp(peak - lt) + 1.0;
      peak = lt;
    } else {
      scaled += std::exp(lt - peak);
    }
    if (lt < prev && lt < peak - 40.0) return std::exp(-0.5 * (peak + std::log(scaled)));
    prev = lt;
  }
  throw std::domain_error("coherent normalization series did not converge");
}

std::vector<MomentRow> moment_check(const quad::RealFunction& radial_density, const GrowthProfile& p, int k_max) {
  const double radius = convergence_radius(p);
  std::vector<MomentRow> rows;
  for (int k = 0; k <= k_max; ++k) {
    auto integrand = [&](double r) -> cplx {
      if (r < 0.0 || r >= radius) return 0.0;
      return std::pow(r, 2 * k) * radial_density(r);
    };
    quad::LineOptions opts;
    opts.abs_tol = 1e-300;
    opts.rel_tol = 1e-14;
    if (std::isfinite(radius)) opts.bounds = std::pair{0.0, radius};
    MomentRow row;
    row.k = k;
    row.moment = quad::integrate_line(integrand, opts).value.real();
    row.expected = std::exp(2.0 * p.log_alpha_factorial(k)) / (2.0 * std::numbers::pi);
    row.deviation = row.moment - row.expected;
    row.relative = std::abs(row.deviation) / row.expected;
    rows.push_back(row);
  }
  return rows;
}

double coefficient_bound(const PBModel& m, Coherent side, const TestFunction& g, int n) {
  if (!has_transforms(m)) throw std::invalid_argument("model '" + m.name + "' has no coefficient bounds");
  const double quarter_pi = std::pow(std::numbers::pi, 0.25);
  const double n_psi = std::abs(m.norm_product);
  if (m.flavor == Flavor::equal_alpha) {
    if (side == Coherent::Phi) return quarter_pi * std::numbers::sqrt2 * transform_norm(m, g, Transform::plus);
    return n_psi * quarter_pi * std::numbers::sqrt2 * transform_norm(m, g, Transform::minus);
  }
  const double two_n = std::pow(2.0, n);
  if (side == Coherent::Phi) return quarter_pi / (std::sqrt(two_n) * std::numbers::e) * transform_norm(m, g, Transform::plus);
  return 2.0 * n_psi * std::sqrt(two_n * std::sqrt(std::numbers::pi)) * transform_norm(m, g, Transform::minus);
}

WeakPairing weak_pairing(const PBModel& m, const WeakStateQuery& q, const TestFunction& g) {
  const StateFamily fam(m, q.side == Coherent::Phi ? Side::phi : Side::psi, q.max_terms);
  const double r = std::abs(q.z);
  const cplx w = std::conj(q.z);
  WeakPairing out;
  out.rigorous = has_transforms(m);
  // Bound C_n = c 2^{slope n / 2}.
  double log_c = 0.0, slope = 0.0;
  if (out.rigorous) {
    log_c = std::log(coefficient_bound(m, q.side, g, 0));
    if (m.flavor == Flavor::sech_pair) slope = q.side == Coherent::Phi ? -1.0 : 1.0;
  }
  std::vector<cplx> c;
  std::vector<double> term_abs;
  cplx weight = std::exp(-0.5 * r * r);
  for (int n = 0; n <= q.max_terms; ++n) {
    if (n > 0) weight *= w / std::sqrt(static_cast<double>(n));
    c.push_back(pair_right(fam, n, g));
    out.value += weight * c.back();
    term_abs.push_back(std::abs(weight * c.back()));
    out.terms = n + 1;
    if (out.rigorous) {
      out.tail_bound = tail_from(r, n, log_c, slope);
    } else {
      // Extrapolated from the last three terms (parity can zero one of them).
      const std::size_t k = term_abs.size();
      double recent = 0.0;
      for (std::size_t j = k >= 3 ? k - 3 : 0; j < k; ++j) recent = std::max(recent, term_abs[j]);
      out.tail_bound = (r == 0.0) ? 0.0 : recent;
      if (n < 10 && r > 0.0) continue;
    }
    if (out.tail_bound < q.tail_tol) return out;
  }
  if (out.tail_bound > q.tail_tol) {
    std::ostringstream msg;
    msg << "weak pairing tail bound " << out.tail_bound << " above " << q.tail_tol << " after " << out.terms
        << " terms at |z| = " << r;
    throw std::runtime_error(msg.str());
  }
  return out;
}

std::vector<EigenRelation> eigen_relation_residuals(const PBModel& m, std::span<const cplx> zs, const TestFunction& g,
                                                    int terms) {
  const StateFamily phi(m, Side::phi, terms), psi(m, Side::psi, terms);
  const JetFunction gj = g.as_jet_function();
  const JetFunction adag_g = ladder(m, Ladder::a_dag, gj);
  const JetFunction b_g = ladder(m, Ladder::b, gj);
  const auto opts = support_options(g.support());
  std::vector<cplx> g_phi, adag_phi, g_psi, b_psi;
  for (int n = 0; n <= terms; ++n) {
    auto pair = [&](const JetFunction& h, const StateFamily& fam) {
      return quad::integrate_line([&](double x) { return std::conj(h(x, 0)[0]) * fam.eval(n, x, 0)[0]; }, opts)
          .value;
    };
    g_phi.push_back(pair(gj, phi));
    adag_phi.push_back(pair(adag_g, phi));
    g_psi.push_back(pair(gj, psi));
    b_psi.push_back(pair(b_g, psi));
  }
  auto rel = [](cplx lhs, cplx rhs) { return std::abs(lhs - rhs) / (std::abs(rhs) > 0.0 ? std::abs(rhs) : 1.0); };
  std::vector<EigenRelation> out;
  for (const cplx z : zs) {
    // <h, Phi(z)> = e^{-|z|^2/2} sum z^n / sqrt(n!) <h, phi_n>
    EigenRelation e;
    e.lhs_phi = coherent_series(adag_phi, z, terms);
    e.rhs_phi = z * coherent_series(g_phi, z, terms);
    e.lhs_psi = coherent_series(b_psi, z, terms);
    e.rhs_psi = z * coherent_series(g_psi, z, terms);
    e.residual_phi = rel(e.lhs_phi, e.rhs_phi);
    e.residual_psi = rel(e.lhs_psi, e.rhs_psi);
    out.push_back(e);
  }
  return out;
}

EigenRelation eigen_relation_residual(const PBModel& m, cplx z, const TestFunction& g, int terms) {
  return eigen_relation_residuals(m, std::span<const cplx>(&z, 1), g, terms).front();
}

int terms_for_radius(double R) {
  const double lambda = R * R;
  int N = 60;
  while (boost::math::gamma_p(N + 1.0, lambda) >= 1e-20) ++N;
  return N;
}

ResolutionResult resolution_of_identity(const PBModel& m, const TestFunction& f, const TestFunction& g, double R,
                                        const ResolutionOptions& opts) {
  if (!(R > 0.0)) throw std::invalid_argument("resolution radius must be positive");
  ResolutionResult res;
  res.R = R;
  res.terms = opts.terms > 0 ? opts.terms : terms_for_radius(R);
  res.n_theta = opts.n_theta > 0 ? opts.n_theta : 2 * res.terms + 1;
  const int N = res.terms;
  const std::size_t dim = static_cast<std::size_t>(N) + 1;
  const StateFamily phi(m, Side::phi, N), psi(m, Side::psi, N);

  // A_n = <f, phi_n>, B_n = <psi_n, g> and the swapped pair <f, psi_n>, <phi_n, g>.
  std::vector<cplx> A(dim), B(dim), As(dim), Bs(dim);
  parallel_for(4 * dim, opts.jobs, [&](std::size_t k) {
    const int n = static_cast<int>(k % dim);
    const std::size_t i = k % dim;
    switch (k / dim) {
      case 0: A[i] = pair_left(f, phi, n); break;
      case 1: B[i] = pair_right(psi, n, g); break;
      case 2: As[i] = pair_left(f, psi, n); break;
      default: Bs[i] = pair_right(phi, n, g); break;
    }
  });
  res.exact = exact_pairing(f, g);
  for (int n = 0; n <= N; ++n) {
    const double p = boost::math::gamma_p(n + 1.0, R * R);
    res.series_phi_psi += A[static_cast<std::size_t>(n)] * B[static_cast<std::size_t>(n)] * p;
    res.series_psi_phi += As[static_cast<std::size_t>(n)] * Bs[static_cast<std::size_t>(n)] * p;
  }

  // With alpha_n = sqrt(n) the normalization is N(r)^2 = (sum r^{2k}/k!)^{-1} = e^{-r^2}
  // and d lambda(r) = (1/pi) r e^{-r^2} dr solves the moment problem, so
  // d nu = N(r)^{-2} d lambda(r) d theta = (1/pi) r dr d theta = (1/pi) dz.
  // In t = r^2: (1/pi) dz = (1/(2 pi)) dt d theta, and the uniform angular rule
  // turns (1/(2 pi)) int d theta into a plain average over the nodes.
  auto angular_average = [&](double t, int n_theta) {
    const double r = std::sqrt(t);
    std::pair<cplx, cplx> sum{};
    for (int j = 0; j < n_theta; ++j) {
      const cplx z = std::polar(r, 2.0 * std::numbers::pi * j / n_theta);
      const cplx zb = std::conj(z);
      sum.first += coherent_series(A, z, N) * coherent_series(B, zb, N);
      sum.second += coherent_series(As, z, N) * coherent_series(Bs, zb, N);
    }
    sum.first /= static_cast<double>(n_theta);
    sum.second /= static_cast<double>(n_theta);
    return sum;
  };

  std::vector<double> edges{0.0};
  const double T = R * R;
  for (double t = opts.panel; t < T; t += opts.panel) edges.push_back(t);
  for (double rr : opts.trace_radii)
    if (rr > 0.0 && rr < R) edges.push_back(rr * rr);
  edges.push_back(T);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  const std::size_t panels = edges.size() - 1;
  std::vector<std::pair<cplx, cplx>> panel_value(panels), panel_doubled(panels);
  parallel_for(panels, opts.jobs, [&](std::size_t i) {
    const auto rule = quad::gauss_legendre(opts.n_r, edges[i], edges[i + 1]);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const auto v = angular_average(rule.nodes[k], res.n_theta);
      const auto d = angular_average(rule.nodes[k], 2 * res.n_theta);
      panel_value[i].first += rule.weights[k] * v.first;
      panel_value[i].second += rule.weights[k] * v.second;
      panel_doubled[i].first += rule.weights[k] * d.first;
      panel_doubled[i].second += rule.weights[k] * d.second;
    }
  });

  std::vector<double> trace_radii = opts.trace_radii;
  trace_radii.push_back(R);
  std::sort(trace_radii.begin(), trace_radii.end());
  std::pair<cplx, cplx> running{}, doubled{};
  std::size_t next_trace = 0;
  for (std::size_t i = 0; i < panels; ++i) {
    running.first += panel_value[i].first;
    running.second += panel_value[i].second;
    doubled.first += panel_doubled[i].first;
    doubled.second += panel_doubled[i].second;
    while (next_trace < trace_radii.size() && trace_radii[next_trace] * trace_radii[next_trace] <= edges[i + 1]) {
      if (trace_radii[next_trace] > 0.0) {
        ResolutionTracePoint p;
        p.R = trace_radii[next_trace];
        p.phi_psi = running.first;
        p.psi_phi = running.second;
        p.deviation_phi_psi = std::abs(p.phi_psi - res.exact);
        p.deviation_psi_phi = std::abs(p.psi_phi - res.exact);
        res.trace.push_back(p);
      }
      ++next_trace;
    }
  }
  res.phi_psi = running.first;
  res.psi_phi = running.second;
  res.angular_change =
      std::max(std::abs(doubled.first - res.phi_psi), std::abs(doubled.second - res.psi_phi));
  return res;
}

cplx classical_coherent_state(cplx z, double x) {
  return std::pow(std::numbers::pi, -0.25) *
         std::exp(-0.5 * x * x + std::numbers::sqrt2 * z * x - 0.5 * z * z - 0.5 * std::norm(z));
}

}  // namespace pbw
