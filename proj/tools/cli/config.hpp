#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pbw/jet.hpp"

namespace pbw::cli {

/// Invalid or unreadable configuration; maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelSpec {
  enum class Source { builtin, expressions, equal_alpha };
  Source source = Source::builtin;
  std::string builtin = "example1";
  std::vector<cplx> params;
  std::string alpha_a, beta_a, alpha_b, beta_b;  // Source::expressions
  std::string alpha;                             // Source::equal_alpha
};

struct GridSpec {
  double lo = -3.0;
  double hi = 3.0;
  int points = 201;
};

struct BumpSpec {
  double center = 0.0;
  double width = 0.8;
};

struct QuasiBasisSpec {
  int pairs = 5;
  int terms = 40;
  double center_lo = -0.3, center_hi = 0.3;
  double width_lo = 1.3, width_hi = 1.6;
};

struct BicoherentSpec {
  double re_lo = -2.0, re_hi = 2.0;
  double im_lo = -2.0, im_hi = 2.0;
  int re_points = 5, im_points = 5;
  int max_terms = 120;
  double tail_tol = 1e-12;
  int eigen_terms = 100;
  BumpSpec f{0.0, 0.8};
  BumpSpec g{0.0, 0.8};
  double radius = 6.0;
  std::vector<double> trace{1.0, 2.0, 3.0, 4.0, 5.0};
  int n_r = 20;
  int n_theta = 0;
};

/// Known checks in dependency order.
const std::vector<std::string>& known_checks();

struct RunConfig {
  ModelSpec model;
  int n_max = 10;
  std::uint64_t seed = 20240607;
  GridSpec grid;
  std::map<std::string, double> tolerances;  // before tol_scale
  std::vector<std::string> checks;
  QuasiBasisSpec quasi_basis;
  BicoherentSpec bicoherent;
  std::string out_dir = "pbw_out";
  double tol_scale = 1.0;
  int jobs = 1;

  /// Scaled tolerance of a check.
  double tolerance(const std::string& check) const;
};

/// Default tolerances per check.
const std::map<std::string, double>& default_tolerances();

using Environment = std::map<std::string, std::string>;

/// Reads the INI file at `path` (defaults only when empty), then applies
/// PBW_<SECTION>__<KEY> overrides from `env`. Throws ConfigError.
RunConfig load_config(const std::optional<std::string>& path, const Environment& env);

/// Parses "1.5", "-2", "0.3+0.1*i" style constants.
cplx parse_complex(const std::string& text);

}  // namespace pbw::cli
