#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <boost/uuid/detail/sha1.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "pbw/bicoherent.hpp"
#include "pbw/pairings.hpp"
#include "pbw/parallel.hpp"
#include "pbw/spectral.hpp"
#include "pbw/states.hpp"

namespace pbw::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------- helpers

json cjson(cplx v) { return json::array({v.real(), v.imag()}); }

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string sha1_hex(const std::string& text) {
  boost::uuids::detail::sha1 h;
  h.process_bytes(text.data(), text.size());
  unsigned int digest[5];
  h.get_digest(digest);
  char buf[41];
  for (int i = 0; i < 5; ++i) std::snprintf(buf + 8 * i, 9, "%08x", digest[i]);
  return std::string(buf, 16);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Comma-separated, header row, LF endings, full precision.
class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : path_(path) {
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw ConfigError("cannot write '" + path.string() + "'");
    write_line(header);
  }
  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(fmt17(v));
    write_line(cells);
    ++rows_;
  }
  int rows() const { return rows_; }
  const fs::path& path() const { return path_; }

 private:
  void write_line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }
  fs::path path_;
  std::ofstream out_;
  int rows_ = 0;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

std::string flavor_name(Flavor f) {
  switch (f) {
    case Flavor::constant_alpha: return "constant_alpha";
    case Flavor::equal_alpha: return "equal_alpha";
    case Flavor::sech_pair: return "sech_pair";
    default: return "general";
  }
}

// ---------------------------------------------------------------- model

struct ModelBundle {
  PBModel model;
  bool needs_normalization = false;  // norm_product is not known analytically
};

ModelBundle build_model(const ModelSpec& spec) {
  ModelBundle b;
  try {
    switch (spec.source) {
      case ModelSpec::Source::builtin: b.model = build_builtin(spec.builtin, spec.params); break;
      case ModelSpec::Source::expressions:
        b.model = from_expressions(spec.alpha_a, spec.beta_a, spec.alpha_b, spec.beta_b);
        b.needs_normalization = true;
        break;
      case ModelSpec::Source::equal_alpha:
        b.model = equal_alpha(spec.alpha);
        b.needs_normalization = true;
        break;
    }
  } catch (const ParseError& e) {
    throw ConfigError(std::string("[model] expression error: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[model] ") + e.what());
  }
  return b;
}

json model_echo(const ModelSpec& spec, const PBModel& m) {
  json j;
  j["name"] = m.name;
  switch (spec.source) {
    case ModelSpec::Source::builtin: {
      j["source"] = "builtin";
      j["builtin"] = spec.builtin;
      json params = json::array();
      for (const cplx p : spec.params) params.push_back(cjson(p));
      j["params"] = params;
      break;
    }
    case ModelSpec::Source::expressions: j["source"] = "expressions"; break;
    case ModelSpec::Source::equal_alpha:
      j["source"] = "equal_alpha";
      j["alpha"] = spec.alpha;
      break;
  }
  j["alpha_a"] = to_string(m.alpha_a);
  j["beta_a"] = to_string(m.beta_a);
  j["alpha_b"] = to_string(m.alpha_b);
  j["beta_b"] = to_string(m.beta_b);
  j["flavor"] = flavor_name(m.flavor);
  return j;
}

json settings_echo(const RunConfig& c) {
  json j;
  j["n_max"] = c.n_max;
  j["seed"] = c.seed;
  j["grid"] = {{"lo", c.grid.lo}, {"hi", c.grid.hi}, {"points", c.grid.points}};
  j["tol_scale"] = c.tol_scale;
  return j;
}

// ---------------------------------------------------------------- checks

struct CheckRecord {
  std::string name;
  std::string digest;
  double metric = kNaN;
  double tolerance = kNaN;
  std::string verdict;  // pass, fail, blocked, skipped, error
  json details = json::object();
};

json record_json(const CheckRecord& r) {
  json j;
  j["name"] = r.name;
  j["inputs_digest"] = r.digest;
  j["metric"] = number(r.metric);
  j["tolerance"] = number(r.tolerance);
  j["verdict"] = r.verdict;
  j["details"] = r.details;
  return j;
}

bool ok(const CheckRecord& r) { return r.verdict == "pass" || r.verdict == "skipped"; }

struct Context {
  const RunConfig& cfg;
  PBModel model;
  std::vector<double> grid;
  json model_json;
  fs::path out;
  int jobs = 1;
};

TestFunction bump(const BumpSpec& s) { return TestFunction(s.center, s.width); }

std::mt19937_64 rng_for(const RunConfig& c, const std::string& check) {
  std::seed_seq seq{static_cast<std::uint32_t>(c.seed), static_cast<std::uint32_t>(c.seed >> 32),
                    static_cast<std::uint32_t>(std::hash<std::string>{}(check) & 0xffffffffu)};
  return std::mt19937_64(seq);
}

/// Seeded random bump pairs for the quasi-basis and transform checks.
std::vector<std::pair<TestFunction, TestFunction>> random_pairs(const RunConfig& c, const std::string& check,
                                                                int count) {
  auto rng = rng_for(c, check);
  const auto& q = c.quasi_basis;
  std::uniform_real_distribution<double> uc(q.center_lo, q.center_hi), uw(q.width_lo, q.width_hi);
  std::vector<std::pair<TestFunction, TestFunction>> pairs;
  for (int i = 0; i < count; ++i) {
    const double fc = uc(rng), fw = uw(rng), gc = uc(rng), gw = uw(rng);
    pairs.emplace_back(TestFunction(fc, fw), TestFunction(gc, gw));
  }
  return pairs;
}

json bump_json(const TestFunction& f) { return {{"center", f.center()}, {"width", f.width()}}; }

cplx direct_pairing(const TestFunction& f, const StateFamily& fam, int n, bool function_left) {
  quad::LineOptions opts;
  opts.bounds = f.support();
  opts.abs_tol = 1e-14;
  opts.rel_tol = 1e-13;
  return quad::integrate_line(
             [&](double x) {
               const cplx s = fam.eval(n, x, 0)[0];
               return function_left ? std::conj(f(x)) * s : std::conj(s) * f(x);
             },
             opts)
      .value;
}

void check_conditions(Context& ctx, CheckRecord& r, int) {
  const auto rep = check_pb_conditions(ctx.model, ctx.grid, r.tolerance);
  r.metric = std::max(rep.max_abs1, rep.max_abs2);
  r.details["max_residual_alpha"] = rep.max_abs1;
  r.details["max_residual_beta"] = rep.max_abs2;
}

void check_commutator(Context& ctx, CheckRecord& r, int) {
  auto rng = rng_for(ctx.cfg, r.name);
  std::uniform_real_distribution<double> uc(0.5 * ctx.cfg.grid.lo, 0.5 * ctx.cfg.grid.hi), uw(0.5, 1.5);
  json bumps = json::array();
  r.metric = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double c = uc(rng), w = uw(rng);
    const TestFunction f(c, w);
    const auto s = commutator_residual(ctx.model, f.as_jet_function(), ctx.grid);
    r.metric = std::max(r.metric, s.max_abs);
    bumps.push_back({{"center", c}, {"width", w}, {"residual", s.max_abs}});
  }
  r.details["bumps"] = bumps;
}

void check_normalization(Context& ctx, CheckRecord& r, bool analytic) {
  r.metric = 0.0;
  if (analytic) {
    const cplx numeric = fix_normalization(ctx.model);
    const double rel = std::abs(numeric - ctx.model.norm_product) / std::abs(ctx.model.norm_product);
    r.details["analytic"] = cjson(ctx.model.norm_product);
    r.details["numeric"] = cjson(numeric);
    r.details["relative_difference"] = rel;
    r.metric = rel;
  }
  const StateFamily phi(ctx.model, Side::phi, 0), psi(ctx.model, Side::psi, 0);
  const cplx p00 = state_pairing(psi, phi, 0, 0).value;
  r.details["norm_product"] = cjson(ctx.model.norm_product);
  r.details["vacuum_pairing"] = cjson(p00);
  r.metric = std::max(r.metric, std::abs(p00 - 1.0));
}

void check_closed_form(Context& ctx, CheckRecord& r, int) {
  if (!has_closed_form(ctx.model)) {
    r.verdict = "skipped";
    r.details["reason"] = "model has no closed form";
    return;
  }
  r.metric = 0.0;
  for (const auto side : {PolySide::pi, PolySide::sigma})
    for (int n = 0; n <= ctx.cfg.n_max; ++n)
      for (double x : ctx.grid) {
        const cplx closed = pi_sigma_closed(ctx.model, side, n, x, 0)[0];
        const cplx rec = pi_sigma_recursive(ctx.model, side, n, x, 0, std::max(kDefaultMaxOrder, ctx.cfg.n_max))[0];
        r.metric = std::max(r.metric, std::abs(closed - rec) / (1.0 + std::abs(closed)));
      }
  r.details["measure"] = "max |closed - recursive| / (1 + |closed|)";
}

void check_ladder(Context& ctx, CheckRecord& r, int) {
  r.metric = 0.0;
  json per_n = json::array();
  for (int n = 0; n < std::max(ctx.cfg.n_max, 1); ++n) {
    const double v = verify_ladder(ctx.model, n, ctx.grid).max_relative();
    per_n.push_back(v);
    r.metric = std::max(r.metric, v);
  }
  r.details["per_level"] = per_n;
}

void check_biorthonormality(Context& ctx, CheckRecord& r, int jobs) {
  const auto rep = biorthonormality_matrix(ctx.model, ctx.cfg.n_max, jobs);
  r.metric = rep.max_deviation;
  r.details["size"] = ctx.cfg.n_max + 1;
}

void check_eigen(Context& ctx, CheckRecord& r, int) {
  r.metric = 0.0;
  for (const auto side : {HSide::H, HSide::H_dag})
    for (int n = 0; n <= ctx.cfg.n_max; ++n) r.metric = std::max(r.metric, eigen_residual(ctx.model, side, n, ctx.grid));
  r.details["measure"] = "sup |(H - n) phi_n| / sup |phi_n| and the H^dag analogue";
}

void check_hsusy(Context& ctx, CheckRecord& r, int) {
  r.metric = 0.0;
  for (const auto side : {HSide::H, HSide::H_dag})
    for (int n = 0; n <= ctx.cfg.n_max; ++n)
      r.metric = std::max(r.metric, hsusy_shift_check(ctx.model, n, ctx.grid, side));
}

void check_transforms(Context& ctx, CheckRecord& r, int) {
  if (!has_transforms(ctx.model)) {
    r.verdict = "skipped";
    r.details["reason"] = "model has no transforms";
    return;
  }
  const auto pair = random_pairs(ctx.cfg, r.name, 1).front();
  const auto& [f, g] = pair;
  const int top = std::min(8, ctx.cfg.n_max);
  const StateFamily phi(ctx.model, Side::phi, top), psi(ctx.model, Side::psi, top);
  r.metric = 0.0;
  for (int n = 0; n <= top; ++n) {
    const cplx df = direct_pairing(f, phi, n, true);
    const cplx dg = direct_pairing(g, psi, n, false);
    r.metric = std::max(r.metric, std::abs(pairing_via_transform(ctx.model, f, Side::phi, n) - df) / (1.0 + std::abs(df)));
    r.metric = std::max(r.metric, std::abs(pairing_via_transform(ctx.model, g, Side::psi, n) - dg) / (1.0 + std::abs(dg)));
  }
  r.details["f"] = bump_json(f);
  r.details["g"] = bump_json(g);
  r.details["levels"] = top + 1;
}

void check_quasi_basis(Context& ctx, CheckRecord& r, int jobs) {
  const auto pairs = random_pairs(ctx.cfg, r.name, ctx.cfg.quasi_basis.pairs);
  CsvWriter csv(ctx.out / "quasi_basis_trace.csv", {"pair", "ordering", "N", "deviation"});
  json rows = json::array();
  r.metric = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [f, g] = pairs[i];
    json row{{"f", bump_json(f)}, {"g", bump_json(g)}};
    for (const auto ordering : {Ordering::phi_psi, Ordering::psi_phi}) {
      const auto t = quasi_basis_sum(ctx.model, f, g, ctx.cfg.quasi_basis.terms, ordering, jobs);
      const int tag = ordering == Ordering::phi_psi ? 0 : 1;
      for (std::size_t k = 0; k < t.deviation.size(); ++k)
        csv.row({double(i), double(tag), double(k), t.deviation[k]});
      row[tag == 0 ? "deviation_phi_psi" : "deviation_psi_phi"] = t.final_deviation;
      r.metric = std::max(r.metric, t.final_deviation);
    }
    rows.push_back(row);
  }
  r.details["terms"] = ctx.cfg.quasi_basis.terms;
  r.details["pairs"] = rows;
  r.details["trace_file"] = "quasi_basis_trace.csv";
}

/// Printed Hamiltonian name matching the configured model, if any.
std::optional<std::pair<std::string, double>> printed_match(const RunConfig& c) {
  if (c.model.source != ModelSpec::Source::builtin) return std::nullopt;
  if (c.model.builtin == "example1" || c.model.builtin == "example2") return std::pair{c.model.builtin, 0.0};
  if (c.model.builtin == "constant_alpha" && c.model.params.size() >= 3 && c.model.params[0] == cplx(1.0) &&
      c.model.params[1] == cplx(1.0) && c.model.params[2].imag() == 0.0)
    return std::pair{std::string("constant_k"), c.model.params[2].real()};
  return std::nullopt;
}

void check_hamiltonian(Context& ctx, CheckRecord& r, int) {
  const auto match = printed_match(ctx.cfg);
  if (!match) {
    r.verdict = "skipped";
    r.details["reason"] = "no printed Hamiltonian for this model";
    return;
  }
  const auto rep = builtin_hamiltonian_crosscheck(match->first, ctx.grid, match->second);
  r.metric = rep.max_deviation;
  r.details["printed"] = match->first;
  const char* names[6] = {"k2", "k1", "k0", "q2", "q1", "q0"};
  for (int i = 0; i < 6; ++i) r.details["deviation"][names[i]] = rep.deviation[static_cast<std::size_t>(i)];
}

std::vector<cplx> eigen_check_points() {
  std::vector<cplx> zs{cplx{}};
  for (int k = 0; k < 8; ++k) zs.push_back(std::polar(k % 2 == 0 ? 2.0 : 1.0, k * std::numbers::pi / 4.0));
  return zs;
}

void check_eigen_relation(Context& ctx, CheckRecord& r, int) {
  const auto zs = eigen_check_points();
  const auto g = bump(ctx.cfg.bicoherent.g);
  const auto res = eigen_relation_residuals(ctx.model, zs, g, ctx.cfg.bicoherent.eigen_terms);
  r.metric = 0.0;
  json rows = json::array();
  for (std::size_t i = 0; i < zs.size(); ++i) {
    r.metric = std::max({r.metric, res[i].residual_phi, res[i].residual_psi});
    rows.push_back({{"z", cjson(zs[i])}, {"residual_phi", res[i].residual_phi}, {"residual_psi", res[i].residual_psi}});
  }
  r.details["g"] = bump_json(g);
  r.details["points"] = rows;
}

struct ResolutionOutcome {
  ResolutionResult result;
  bool monotone = true;
  double metric = 0.0;
};

ResolutionOutcome run_resolution(const PBModel& m, const BicoherentSpec& b, int jobs) {
  ResolutionOptions opts;
  opts.n_r = b.n_r;
  opts.n_theta = b.n_theta;
  opts.trace_radii = b.trace;
  opts.jobs = jobs;
  ResolutionOutcome o;
  o.result = resolution_of_identity(m, bump(b.f), bump(b.g), b.radius, opts);
  const auto& t = o.result.trace;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i].deviation_phi_psi < t[i - 1].deviation_phi_psi && t[i].deviation_psi_phi < t[i - 1].deviation_psi_phi))
      o.monotone = false;
  o.metric = std::max(std::abs(o.result.phi_psi - o.result.exact), std::abs(o.result.psi_phi - o.result.exact));
  return o;
}

json resolution_details(const ResolutionOutcome& o, const BicoherentSpec& b) {
  json d;
  d["f"] = {{"center", b.f.center}, {"width", b.f.width}};
  d["g"] = {{"center", b.g.center}, {"width", b.g.width}};
  d["radius"] = o.result.R;
  d["terms"] = o.result.terms;
  d["n_theta"] = o.result.n_theta;
  d["phi_psi"] = cjson(o.result.phi_psi);
  d["psi_phi"] = cjson(o.result.psi_phi);
  d["exact"] = cjson(o.result.exact);
  d["series_phi_psi"] = cjson(o.result.series_phi_psi);
  d["series_psi_phi"] = cjson(o.result.series_psi_phi);
  d["angular_change"] = o.result.angular_change;
  d["monotone_trace"] = o.monotone;
  json trace = json::array();
  for (const auto& p : o.result.trace)
    trace.push_back({{"R", p.R}, {"deviation_phi_psi", p.deviation_phi_psi}, {"deviation_psi_phi", p.deviation_psi_phi}});
  d["trace"] = trace;
  return d;
}

void check_resolution(Context& ctx, CheckRecord& r, int jobs) {
  const auto o = run_resolution(ctx.model, ctx.cfg.bicoherent, jobs);
  r.metric = o.metric;
  r.details = resolution_details(o, ctx.cfg.bicoherent);
  if (!o.monotone) r.verdict = "fail";
}

void check_moments(Context&, CheckRecord& r, int) {
  const auto rows =
      moment_check([](double x) { return x * std::exp(-x * x) / std::numbers::pi; }, pseudo_bosonic_profile(), 12);
  r.metric = 0.0;
  json list = json::array();
  for (const auto& row : rows) {
    r.metric = std::max(r.metric, row.relative);
    list.push_back({{"k", row.k}, {"moment", row.moment}, {"expected", row.expected}, {"relative", row.relative}});
  }
  r.details["measure"] = "relative deviation from k!/(2 pi)";
  r.details["rows"] = list;
}

using CheckFn = void (*)(Context&, CheckRecord&, int);

const std::map<std::string, std::vector<std::string>>& dependencies() {
  static const std::map<std::string, std::vector<std::string>> d{
      {"conditions", {}},
      {"commutator", {"conditions"}},
      {"normalization", {"conditions"}},
      {"closed_form", {"conditions"}},
      {"ladder", {"conditions", "normalization"}},
      {"biorthonormality", {"conditions", "normalization"}},
      {"eigen", {"conditions"}},
      {"hsusy", {"conditions"}},
      {"transforms", {"conditions", "normalization"}},
      {"quasi_basis", {"conditions", "normalization"}},
      {"hamiltonian", {"conditions"}},
      {"eigen_relation", {"conditions", "normalization"}},
      {"resolution", {"conditions", "normalization"}},
      {"moments", {}},
  };
  return d;
}

CheckFn check_fn(const std::string& name) {
  static const std::map<std::string, CheckFn> fns{
      {"conditions", check_conditions},       {"commutator", check_commutator},
      {"closed_form", check_closed_form},     {"ladder", check_ladder},
      {"biorthonormality", check_biorthonormality}, {"eigen", check_eigen},
      {"hsusy", check_hsusy},                 {"transforms", check_transforms},
      {"quasi_basis", check_quasi_basis},     {"hamiltonian", check_hamiltonian},
      {"eigen_relation", check_eigen_relation}, {"resolution", check_resolution},
      {"moments", check_moments}};
  return fns.at(name);
}

CheckRecord new_record(const Context& ctx, const std::string& name) {
  CheckRecord r;
  r.name = name;
  r.tolerance = ctx.cfg.tolerance(name);
  json inputs{{"check", name}, {"model", ctx.model_json}, {"settings", settings_echo(ctx.cfg)}};
  if (name == "quasi_basis" || name == "transforms")
    inputs["quasi_basis"] = {{"pairs", ctx.cfg.quasi_basis.pairs},       {"terms", ctx.cfg.quasi_basis.terms},
                             {"center_lo", ctx.cfg.quasi_basis.center_lo}, {"center_hi", ctx.cfg.quasi_basis.center_hi},
                             {"width_lo", ctx.cfg.quasi_basis.width_lo},   {"width_hi", ctx.cfg.quasi_basis.width_hi}};
  if (name == "eigen_relation" || name == "resolution") {
    const auto& b = ctx.cfg.bicoherent;
    inputs["bicoherent"] = {{"f", {b.f.center, b.f.width}}, {"g", {b.g.center, b.g.width}}, {"radius", b.radius},
                            {"trace", b.trace},             {"n_r", b.n_r},                 {"n_theta", b.n_theta},
                            {"eigen_terms", b.eigen_terms}};
  }
  r.digest = sha1_hex(inputs.dump());
  return r;
}

void finish(CheckRecord& r) {
  if (!r.verdict.empty()) return;
  r.verdict = (std::isfinite(r.metric) && r.metric <= r.tolerance) ? "pass" : "fail";
}

template <class Body>
void guarded(CheckRecord& r, Body&& body) {
  try {
    body();
    finish(r);
  } catch (const std::exception& e) {
    r.verdict = "error";
    r.details["error"] = e.what();
  }
}

int resolve_jobs(int jobs) {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

json summary_json(const std::vector<CheckRecord>& records) {
  int passed = 0, failed = 0, blocked = 0, skipped = 0, errors = 0;
  for (const auto& r : records) {
    if (r.verdict == "pass") ++passed;
    if (r.verdict == "fail") ++failed;
    if (r.verdict == "blocked") ++blocked;
    if (r.verdict == "skipped") ++skipped;
    if (r.verdict == "error") ++errors;
  }
  json s;
  s["total"] = records.size();
  s["passed"] = passed;
  s["failed"] = failed;
  s["errors"] = errors;
  s["blocked"] = blocked;
  s["skipped"] = skipped;
  s["verdict"] = (failed + blocked + errors == 0) ? "pass" : "fail";
  return s;
}

bool all_ok(const std::vector<CheckRecord>& records) {
  return std::all_of(records.begin(), records.end(), [](const auto& r) { return ok(r); });
}

void print_records(const std::vector<CheckRecord>& records, std::ostream& out) {
  for (const auto& r : records) {
    std::string verdict = r.verdict;
    std::transform(verdict.begin(), verdict.end(), verdict.begin(), ::toupper);
    out << verdict << ' ' << r.name << " metric=" << (std::isfinite(r.metric) ? fmt17(r.metric) : "n/a")
        << " tolerance=" << fmt17(r.tolerance) << '\n';
  }
}

using Clock = std::chrono::steady_clock;

json report_head(const std::string& command, const Context& ctx) {
  json j;
  j["tool"] = "pbw";
  j["command"] = command;
  j["model"] = ctx.model_json;
  j["settings"] = settings_echo(ctx.cfg);
  return j;
}

void write_report(json report, const fs::path& path, Clock::time_point start) {
  report["timing"] = {{"seconds", std::chrono::duration<double>(Clock::now() - start).count()}};
  write_text(path, report.dump(2) + "\n");
}

// ---------------------------------------------------------------- commands

int cmd_check(const RunConfig& cfg, std::ostream& out) {
  const auto start = Clock::now();
  ModelBundle bundle = build_model(cfg.model);
  Context ctx{cfg, bundle.model, linspace(cfg.grid.lo, cfg.grid.hi, cfg.grid.points),
              model_echo(cfg.model, bundle.model), cfg.out_dir, resolve_jobs(cfg.jobs)};

  std::map<std::string, CheckRecord> done;
  auto blocked_by = [&](const std::string& name) -> std::optional<std::string> {
    for (const auto& dep : dependencies().at(name)) {
      const auto it = done.find(dep);
      if (it != done.end() && !ok(it->second)) return dep;
    }
    return std::nullopt;
  };
  auto selected = [&](const std::string& name) {
    return std::find(cfg.checks.begin(), cfg.checks.end(), name) != cfg.checks.end();
  };
  auto block = [&](CheckRecord& r, const std::string& dep) {
    r.verdict = "blocked";
    r.details["blocked_by"] = dep;
  };

  if (selected("conditions")) {
    auto r = new_record(ctx, "conditions");
    guarded(r, [&] { check_conditions(ctx, r, 1); });
    done["conditions"] = r;
  }
  // Normalization fixes the model used by everything downstream.
  const bool need_norm = std::any_of(cfg.checks.begin(), cfg.checks.end(), [](const std::string& n) {
    const auto& d = dependencies().at(n);
    return n == "normalization" || std::find(d.begin(), d.end(), "normalization") != d.end();
  });
  if (need_norm) {
    auto r = new_record(ctx, "normalization");
    if (const auto dep = blocked_by("normalization")) {
      block(r, *dep);
    } else {
      guarded(r, [&] {
        if (bundle.needs_normalization) ctx.model = normalized(ctx.model);
        check_normalization(ctx, r, !bundle.needs_normalization);
      });
    }
    if (selected("normalization") || !ok(r)) done["normalization"] = r;
  }

  std::vector<std::string> rest;
  for (const auto& name : cfg.checks)
    if (name != "conditions" && name != "normalization") rest.push_back(name);
  std::vector<CheckRecord> rest_records(rest.size());
  const int outer = std::min<int>(ctx.jobs, static_cast<int>(std::max<std::size_t>(rest.size(), 1)));
  const int inner = outer > 1 ? 1 : ctx.jobs;
  parallel_for(rest.size(), outer, [&](std::size_t i) {
    auto r = new_record(ctx, rest[i]);
    if (const auto dep = blocked_by(rest[i]))
      block(r, *dep);
    else
      guarded(r, [&] { check_fn(rest[i])(ctx, r, inner); });
    rest_records[i] = std::move(r);
  });
  for (auto& r : rest_records) done[r.name] = std::move(r);

  std::vector<CheckRecord> records;
  for (const auto& name : known_checks())
    if (done.contains(name) && (selected(name) || name == "normalization")) records.push_back(done[name]);

  json report = report_head("check", ctx);
  json checks = json::array();
  for (const auto& r : records) checks.push_back(record_json(r));
  report["checks"] = checks;
  report["summary"] = summary_json(records);
  write_report(report, ctx.out / "check_report.json", start);
  print_records(records, out);
  out << "report: " << (ctx.out / "check_report.json").string() << '\n';
  return all_ok(records) ? kAllPass : kCheckFailure;
}

PBModel ready_model(ModelBundle& bundle) {
  if (bundle.needs_normalization) bundle.model = normalized(bundle.model);
  return bundle.model;
}

int cmd_states(const RunConfig& cfg, std::ostream& out) {
  const auto start = Clock::now();
  ModelBundle bundle = build_model(cfg.model);
  Context ctx{cfg, ready_model(bundle), linspace(cfg.grid.lo, cfg.grid.hi, cfg.grid.points),
              model_echo(cfg.model, bundle.model), cfg.out_dir, resolve_jobs(cfg.jobs)};
  json files = json::array();
  for (const auto side : {Side::phi, Side::psi}) {
    const std::string tag = side == Side::phi ? "phi" : "psi";
    const StateFamily fam(ctx.model, side, cfg.n_max);
    std::vector<std::string> header{"x"};
    for (int n = 0; n <= cfg.n_max; ++n) {
      header.push_back("re_" + tag + "_" + std::to_string(n));
      header.push_back("im_" + tag + "_" + std::to_string(n));
    }
    std::vector<std::vector<double>> rows(ctx.grid.size());
    parallel_for(ctx.grid.size(), ctx.jobs, [&](std::size_t i) {
      rows[i].push_back(ctx.grid[i]);
      for (int n = 0; n <= cfg.n_max; ++n) {
        const cplx v = fam.eval(n, ctx.grid[i], 0)[0];
        rows[i].push_back(v.real());
        rows[i].push_back(v.imag());
      }
    });
    CsvWriter csv(ctx.out / ("states_" + tag + ".csv"), header);
    for (const auto& row : rows) csv.row(row);
    files.push_back({{"side", tag},
                     {"path", "states_" + tag + ".csv"},
                     {"rows", csv.rows()},
                     {"columns", header.size()}});
    out << "wrote " << csv.path().string() << " (" << csv.rows() << " rows)\n";
  }
  json report = report_head("states", ctx);
  report["norm_product"] = cjson(ctx.model.norm_product);
  report["files"] = files;
  write_report(report, ctx.out / "states_report.json", start);
  return kAllPass;
}

int cmd_bicoherent(const RunConfig& cfg, std::ostream& out) {
  const auto start = Clock::now();
  ModelBundle bundle = build_model(cfg.model);
  Context ctx{cfg, ready_model(bundle), linspace(cfg.grid.lo, cfg.grid.hi, cfg.grid.points),
              model_echo(cfg.model, bundle.model), cfg.out_dir, resolve_jobs(cfg.jobs)};
  const auto& b = cfg.bicoherent;
  const auto re = b.re_points == 1 ? std::vector<double>{b.re_lo} : linspace(b.re_lo, b.re_hi, b.re_points);
  const auto im = b.im_points == 1 ? std::vector<double>{b.im_lo} : linspace(b.im_lo, b.im_hi, b.im_points);
  std::vector<cplx> zs;
  for (double x : re)
    for (double y : im) zs.emplace_back(x, y);
  const TestFunction g = bump(b.g);

  struct Row {
    WeakPairing phi, psi;
    std::string error;
  };
  std::vector<Row> rows(zs.size());
  parallel_for(zs.size(), ctx.jobs, [&](std::size_t i) {
    try {
      rows[i].phi = weak_pairing(ctx.model, {zs[i], Coherent::Phi, b.max_terms, b.tail_tol}, g);
      rows[i].psi = weak_pairing(ctx.model, {zs[i], Coherent::Psi, b.max_terms, b.tail_tol}, g);
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  });
  const auto eig = eigen_relation_residuals(ctx.model, zs, g, b.eigen_terms);

  CsvWriter csv(ctx.out / "bicoherent_pairings.csv",
                {"z_re", "z_im", "phi_re", "phi_im", "phi_terms", "phi_tail", "psi_re", "psi_im", "psi_terms",
                 "psi_tail", "eigen_residual_phi", "eigen_residual_psi"});
  CheckRecord pairing = new_record(ctx, "eigen_relation");
  pairing.name = "weak_pairing";
  pairing.tolerance = b.tail_tol;
  pairing.metric = 0.0;
  CheckRecord eigen = new_record(ctx, "eigen_relation");
  eigen.metric = 0.0;
  json failures = json::array();
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const auto& r = rows[i];
    if (!r.error.empty()) {
      failures.push_back({{"z", cjson(zs[i])}, {"error", r.error}});
      pairing.metric = kNaN;
      csv.row({zs[i].real(), zs[i].imag(), kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, eig[i].residual_phi,
               eig[i].residual_psi});
    } else {
      if (std::isfinite(pairing.metric))
        pairing.metric = std::max({pairing.metric, r.phi.tail_bound, r.psi.tail_bound});
      csv.row({zs[i].real(), zs[i].imag(), r.phi.value.real(), r.phi.value.imag(), double(r.phi.terms),
               r.phi.tail_bound, r.psi.value.real(), r.psi.value.imag(), double(r.psi.terms), r.psi.tail_bound,
               eig[i].residual_phi, eig[i].residual_psi});
    }
    eigen.metric = std::max({eigen.metric, eig[i].residual_phi, eig[i].residual_psi});
  }
  pairing.details["points"] = zs.size();
  pairing.details["rigorous_bound"] = has_transforms(ctx.model);
  pairing.details["failures"] = failures;
  if (!failures.empty()) pairing.verdict = "fail";
  finish(pairing);
  eigen.details["points"] = zs.size();
  finish(eigen);

  CheckRecord res = new_record(ctx, "resolution");
  guarded(res, [&] {
    const auto o = run_resolution(ctx.model, b, ctx.jobs);
    res.metric = o.metric;
    res.details = resolution_details(o, b);
    if (!o.monotone) res.verdict = "fail";
    CsvWriter trace(ctx.out / "resolution_trace.csv",
                    {"R", "phi_psi_re", "phi_psi_im", "psi_phi_re", "psi_phi_im", "exact_re", "exact_im",
                     "deviation_phi_psi", "deviation_psi_phi"});
    for (const auto& p : o.result.trace)
      trace.row({p.R, p.phi_psi.real(), p.phi_psi.imag(), p.psi_phi.real(), p.psi_phi.imag(), o.result.exact.real(),
                 o.result.exact.imag(), p.deviation_phi_psi, p.deviation_psi_phi});
  });

  const std::vector<CheckRecord> records{pairing, eigen, res};
  json report = report_head("bicoherent", ctx);
  report["z_grid"] = {{"re", {b.re_lo, b.re_hi, b.re_points}}, {"im", {b.im_lo, b.im_hi, b.im_points}}};
  report["files"] = {"bicoherent_pairings.csv", "resolution_trace.csv"};
  json checks = json::array();
  for (const auto& r : records) checks.push_back(record_json(r));
  report["checks"] = checks;
  report["summary"] = summary_json(records);
  write_report(report, ctx.out / "bicoherent_report.json", start);
  print_records(records, out);
  return all_ok(records) ? kAllPass : kCheckFailure;
}

int cmd_hamiltonian(const RunConfig& cfg, std::ostream& out) {
  const auto start = Clock::now();
  ModelBundle bundle = build_model(cfg.model);
  Context ctx{cfg, bundle.model, linspace(cfg.grid.lo, cfg.grid.hi, cfg.grid.points),
              model_echo(cfg.model, bundle.model), cfg.out_dir, resolve_jobs(cfg.jobs)};
  const HamiltonianCoeffs h(ctx.model, HSide::H), hd(ctx.model, HSide::H_dag);
  CsvWriter csv(ctx.out / "hamiltonian.csv", {"x", "k2_re", "k2_im", "k1_re", "k1_im", "k0_re", "k0_im", "q2_re",
                                              "q2_im", "q1_re", "q1_im", "q0_re", "q0_im"});
  for (double x : ctx.grid) {
    const auto c = h.at(x);
    const auto q = hd.at(x);
    csv.row({x, c[0].real(), c[0].imag(), c[1].real(), c[1].imag(), c[2].real(), c[2].imag(), q[0].real(),
             q[0].imag(), q[1].real(), q[1].imag(), q[2].real(), q[2].imag()});
  }
  CheckRecord r = new_record(ctx, "hamiltonian");
  guarded(r, [&] { check_hamiltonian(ctx, r, 1); });
  const std::vector<CheckRecord> records{r};
  json report = report_head("hamiltonian", ctx);
  report["files"] = {"hamiltonian.csv"};
  report["checks"] = json::array({record_json(r)});
  report["summary"] = summary_json(records);
  write_report(report, ctx.out / "hamiltonian_report.json", start);
  print_records(records, out);
  return all_ok(records) ? kAllPass : kCheckFailure;
}

std::optional<std::string> env_value(const Environment& env, const std::string& name) {
  const auto it = env.find(name);
  if (it == env.end()) return std::nullopt;
  return it->second;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, const Environment& env, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pseudo-bosonic ladder models: verification suites, state tables, bi-coherent states"};
  app.name("pbw");
  app.require_subcommand(1);
  std::optional<std::string> config_path, out_dir;
  std::optional<double> tol_scale;
  std::optional<int> jobs;
  std::string command;
  for (const auto& [name, help] :
       std::vector<std::pair<std::string, std::string>>{{"check", "Run the verification suite"},
                                                        {"states", "Tabulate phi_n and psi_n on the grid"},
                                                        {"bicoherent", "Bi-coherent pairings, eigen relations, resolution"},
                                                        {"hamiltonian", "Tabulate H and H^dag coefficients"}}) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    sub->callback([&command, n = name] { command = n; });
  }
  app.add_option("--config", config_path, "INI configuration file (env PBW_CONFIG)");
  app.add_option("--out", out_dir, "Output directory (env PBW_OUT)");
  app.add_option("--tol-scale", tol_scale, "Multiply every tolerance (env PBW_TOL_SCALE)");
  app.add_option("--jobs", jobs, "Worker threads, 0 = all cores (env PBW_JOBS)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kAllPass;
  } catch (const CLI::ParseError& e) {
    err << "pbw: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (!config_path) config_path = env_value(env, "PBW_CONFIG");
    RunConfig cfg = load_config(config_path, env);
    if (!out_dir) out_dir = env_value(env, "PBW_OUT");
    if (out_dir) cfg.out_dir = *out_dir;
    auto numeric_env = [&](const std::string& name) -> std::optional<double> {
      const auto v = env_value(env, name);
      if (!v) return std::nullopt;
      std::size_t used = 0;
      double parsed = 0.0;
      try {
        parsed = std::stod(*v, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != v->size()) throw ConfigError(name + ": expected a number, got '" + *v + "'");
      return parsed;
    };
    if (!tol_scale) tol_scale = numeric_env("PBW_TOL_SCALE");
    if (!jobs) {
      if (const auto j = numeric_env("PBW_JOBS")) jobs = static_cast<int>(*j);
    }
    if (tol_scale) cfg.tol_scale = *tol_scale;
    if (jobs) cfg.jobs = *jobs;
    if (!(cfg.tol_scale > 0.0) || !std::isfinite(cfg.tol_scale)) throw ConfigError("--tol-scale must be positive");
    if (cfg.jobs < 0) throw ConfigError("--jobs must be non-negative");
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec || !fs::is_directory(cfg.out_dir)) throw ConfigError("cannot create output directory '" + cfg.out_dir + "'");

    if (command == "check") return cmd_check(cfg, out);
    if (command == "states") return cmd_states(cfg, out);
    if (command == "bicoherent") return cmd_bicoherent(cfg, out);
    return cmd_hamiltonian(cfg, out);
  } catch (const ConfigError& e) {
    err << "pbw: configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "pbw: " << e.what() << '\n';
    return kCheckFailure;
  }
}

}  // namespace pbw::cli
