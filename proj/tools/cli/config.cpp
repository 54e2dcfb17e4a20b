#include "config.hpp"

#include <algorithm>
#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <filesystem>
#include <set>

#include "pbw/expr.hpp"

namespace pbw::cli {

namespace {

using Sections = std::map<std::string, std::map<std::string, std::string>>;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = [] {
    std::map<std::string, std::set<std::string>> m{
        {"model", {"builtin", "params", "alpha_a", "beta_a", "alpha_b", "beta_b", "alpha"}},
        {"run", {"n_max", "seed"}},
        {"grid", {"lo", "hi", "points"}},
        {"checks", {"list"}},
        {"quasi_basis", {"pairs", "terms", "center_lo", "center_hi", "width_lo", "width_hi"}},
        {"bicoherent",
         {"re_lo", "re_hi", "im_lo", "im_hi", "re_points", "im_points", "max_terms", "tail_tol", "eigen_terms",
          "f_center", "f_width", "g_center", "g_width", "radius", "trace", "n_r", "n_theta"}},
        {"output", {"dir"}},
    };
    for (const auto& c : known_checks()) m["tolerances"].insert(c);
    return m;
  }();
  return s;
}

std::string unquote(std::string v) {
  boost::algorithm::trim(v);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  return v;
}

void put(Sections& sections, const std::string& section, const std::string& key, const std::string& value,
         const std::string& origin) {
  const auto sec = schema().find(section);
  if (sec == schema().end()) throw ConfigError(origin + ": unknown section [" + section + "]");
  if (!sec->second.contains(key)) throw ConfigError(origin + ": unknown key '" + key + "' in [" + section + "]");
  sections[section][key] = unquote(value);
}

class Reader {
 public:
  explicit Reader(const Sections& s) : s_(s) {}

  const std::string* raw(const std::string& section, const std::string& key) const {
    const auto sec = s_.find(section);
    if (sec == s_.end()) return nullptr;
    const auto it = sec->second.find(key);
    return it == sec->second.end() ? nullptr : &it->second;
  }

  void real(const std::string& section, const std::string& key, double& out) const {
    if (const auto* v = raw(section, key)) out = to_double(*v, section, key);
  }

  template <class Int>
  void integer(const std::string& section, const std::string& key, Int& out) const {
    if (const auto* v = raw(section, key)) {
      std::size_t used = 0;
      long long parsed = 0;
      try {
        parsed = std::stoll(*v, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != v->size()) throw error(section, key, "expected an integer, got '" + *v + "'");
      out = static_cast<Int>(parsed);
    }
  }

  void text(const std::string& section, const std::string& key, std::string& out) const {
    if (const auto* v = raw(section, key)) out = *v;
  }

  std::vector<std::string> list(const std::string& section, const std::string& key) const {
    std::vector<std::string> items;
    const auto* v = raw(section, key);
    if (!v) return items;
    std::vector<std::string> parts;
    boost::algorithm::split(parts, *v, boost::is_any_of(","));
    for (auto& p : parts) {
      boost::algorithm::trim(p);
      if (!p.empty()) items.push_back(p);
    }
    return items;
  }

  static ConfigError error(const std::string& section, const std::string& key, const std::string& what) {
    return ConfigError("[" + section + "] " + key + ": " + what);
  }

  static double to_double(const std::string& v, const std::string& section, const std::string& key) {
    std::size_t used = 0;
    double parsed = 0.0;
    try {
      parsed = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(parsed))
      throw error(section, key, "expected a finite number, got '" + v + "'");
    return parsed;
  }

 private:
  const Sections& s_;
};

void require(bool ok, const std::string& section, const std::string& key, const std::string& what) {
  if (!ok) throw Reader::error(section, key, what);
}

}  // namespace

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names{"conditions",  "commutator",     "normalization", "closed_form",
                                              "ladder",      "biorthonormality", "eigen",       "hsusy",
                                              "transforms",  "quasi_basis",    "hamiltonian",   "eigen_relation",
                                              "resolution",  "moments"};
  return names;
}

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t{
      {"conditions", 1e-10}, {"commutator", 1e-8},  {"normalization", 1e-10}, {"closed_form", 1e-9},
      {"ladder", 1e-8},      {"biorthonormality", 1e-8}, {"eigen", 1e-6},      {"hsusy", 1e-6},
      {"transforms", 1e-8},  {"quasi_basis", 1e-4}, {"hamiltonian", 1e-12},   {"eigen_relation", 1e-8},
      {"resolution", 1e-3},  {"moments", 1e-10}};
  return t;
}

double RunConfig::tolerance(const std::string& check) const { return tolerances.at(check) * tol_scale; }

cplx parse_complex(const std::string& text) {
  try {
    const Expr e = parse_expr(text);
    if (!e.is_constant()) throw ConfigError("'" + text + "' is not a constant");
    return e.value();
  } catch (const ParseError& err) {
    throw ConfigError("bad constant '" + text + "': " + err.what());
  }
}

RunConfig load_config(const std::optional<std::string>& path, const Environment& env) {
  Sections sections;
  if (path) {
    if (!std::filesystem::is_regular_file(*path)) throw ConfigError("cannot read config file '" + *path + "'");
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::read_ini(*path, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(std::string("config syntax error: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
      if (body.empty()) throw ConfigError(*path + ": key '" + section + "' outside a section");
      for (const auto& [key, value] : body) put(sections, section, key, value.data(), *path);
    }
  }
  for (const auto& [name, value] : env) {
    if (!name.starts_with("PBW_")) continue;
    const auto split = name.find("__");
    if (split == std::string::npos) continue;  // flag variables such as PBW_JOBS
    const std::string section = boost::algorithm::to_lower_copy(name.substr(4, split - 4));
    const std::string key = boost::algorithm::to_lower_copy(name.substr(split + 2));
    put(sections, section, key, value, "environment " + name);
  }

  RunConfig c;
  const Reader r(sections);

  // model
  const bool has_alpha = r.raw("model", "alpha") != nullptr;
  const std::array<std::string, 4> coeff{"alpha_a", "beta_a", "alpha_b", "beta_b"};
  const auto given = std::count_if(coeff.begin(), coeff.end(), [&](const auto& k) { return r.raw("model", k); });
  const bool has_builtin = r.raw("model", "builtin") != nullptr;
  if (int(has_alpha) + int(given > 0) + int(has_builtin) > 1)
    throw ConfigError("[model] give exactly one of builtin, alpha, or alpha_a/beta_a/alpha_b/beta_b");
  if (given > 0 && given < 4) throw ConfigError("[model] alpha_a, beta_a, alpha_b and beta_b must all be given");
  if (r.raw("model", "params") && !has_builtin) throw ConfigError("[model] params requires builtin");
  if (has_alpha) {
    c.model.source = ModelSpec::Source::equal_alpha;
    r.text("model", "alpha", c.model.alpha);
  } else if (given == 4) {
    c.model.source = ModelSpec::Source::expressions;
    r.text("model", "alpha_a", c.model.alpha_a);
    r.text("model", "beta_a", c.model.beta_a);
    r.text("model", "alpha_b", c.model.alpha_b);
    r.text("model", "beta_b", c.model.beta_b);
  } else {
    r.text("model", "builtin", c.model.builtin);
    for (const auto& p : r.list("model", "params")) c.model.params.push_back(parse_complex(p));
  }

  r.integer("run", "n_max", c.n_max);
  r.integer("run", "seed", c.seed);
  require(c.n_max >= 0 && c.n_max <= 150, "run", "n_max", "must be in [0, 150]");

  r.real("grid", "lo", c.grid.lo);
  r.real("grid", "hi", c.grid.hi);
  r.integer("grid", "points", c.grid.points);
  require(c.grid.points >= 2, "grid", "points", "must be at least 2");
  require(c.grid.lo < c.grid.hi, "grid", "hi", "must exceed lo");

  c.tolerances = default_tolerances();
  for (auto& [name, value] : c.tolerances) {
    r.real("tolerances", name, value);
    require(value > 0.0, "tolerances", name, "must be positive");
  }

  if (r.raw("checks", "list")) {
    c.checks = r.list("checks", "list");
    for (const auto& name : c.checks)
      require(std::find(known_checks().begin(), known_checks().end(), name) != known_checks().end(), "checks",
              "list", "unknown check '" + name + "'");
    std::vector<std::string> ordered;
    for (const auto& name : known_checks())
      if (std::find(c.checks.begin(), c.checks.end(), name) != c.checks.end()) ordered.push_back(name);
    c.checks = ordered;
  } else {
    c.checks = known_checks();
  }

  auto& q = c.quasi_basis;
  r.integer("quasi_basis", "pairs", q.pairs);
  r.integer("quasi_basis", "terms", q.terms);
  r.real("quasi_basis", "center_lo", q.center_lo);
  r.real("quasi_basis", "center_hi", q.center_hi);
  r.real("quasi_basis", "width_lo", q.width_lo);
  r.real("quasi_basis", "width_hi", q.width_hi);
  require(q.pairs >= 0, "quasi_basis", "pairs", "must be non-negative");
  require(q.terms >= 0 && q.terms <= 150, "quasi_basis", "terms", "must be in [0, 150]");
  require(q.center_lo <= q.center_hi, "quasi_basis", "center_hi", "must not be below center_lo");
  require(q.width_lo > 0.0 && q.width_lo <= q.width_hi, "quasi_basis", "width_lo", "need 0 < width_lo <= width_hi");

  auto& b = c.bicoherent;
  r.real("bicoherent", "re_lo", b.re_lo);
  r.real("bicoherent", "re_hi", b.re_hi);
  r.real("bicoherent", "im_lo", b.im_lo);
  r.real("bicoherent", "im_hi", b.im_hi);
  r.integer("bicoherent", "re_points", b.re_points);
  r.integer("bicoherent", "im_points", b.im_points);
  r.integer("bicoherent", "max_terms", b.max_terms);
  r.real("bicoherent", "tail_tol", b.tail_tol);
  r.integer("bicoherent", "eigen_terms", b.eigen_terms);
  r.real("bicoherent", "f_center", b.f.center);
  r.real("bicoherent", "f_width", b.f.width);
  r.real("bicoherent", "g_center", b.g.center);
  r.real("bicoherent", "g_width", b.g.width);
  r.real("bicoherent", "radius", b.radius);
  r.integer("bicoherent", "n_r", b.n_r);
  r.integer("bicoherent", "n_theta", b.n_theta);
  if (r.raw("bicoherent", "trace")) {
    b.trace.clear();
    for (const auto& t : r.list("bicoherent", "trace")) b.trace.push_back(Reader::to_double(t, "bicoherent", "trace"));
  }
  require(b.re_points >= 1 && b.im_points >= 1, "bicoherent", "re_points", "z grid needs at least one point per axis");
  require(b.re_lo <= b.re_hi && b.im_lo <= b.im_hi, "bicoherent", "re_hi", "z grid bounds out of order");
  require(b.max_terms >= 0 && b.max_terms <= 400, "bicoherent", "max_terms", "must be in [0, 400]");
  require(b.eigen_terms >= 1 && b.eigen_terms <= 400, "bicoherent", "eigen_terms", "must be in [1, 400]");
  require(b.tail_tol > 0.0, "bicoherent", "tail_tol", "must be positive");
  require(b.f.width > 0.0, "bicoherent", "f_width", "must be positive");
  require(b.g.width > 0.0, "bicoherent", "g_width", "must be positive");
  require(b.radius > 0.0, "bicoherent", "radius", "must be positive");
  require(b.n_r >= 1, "bicoherent", "n_r", "must be positive");
  require(b.n_theta >= 0, "bicoherent", "n_theta", "must be non-negative");
  for (double t : b.trace) require(t > 0.0 && t < b.radius, "bicoherent", "trace", "radii must lie in (0, radius)");

  r.text("output", "dir", c.out_dir);
  return c;
}

}  // namespace pbw::cli
