#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli/cli.hpp"
#include "pbw/states.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using pbw::cli::Environment;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pbw_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.ini";
  std::ofstream(p) << text;
  return p;
}

Run run(std::vector<std::string> args, const Environment& env = {}) {
  std::ostringstream out, err;
  Run r;
  r.code = pbw::cli::run_cli(args, env, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p, std::string* raw = nullptr) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  if (raw) *raw = buf.str();
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::istringstream lines(buf.str());
  while (std::getline(lines, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream cs(line);
    while (std::getline(cs, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

json without_timing(json j) {
  j.erase("timing");
  return j;
}

}  // namespace

TEST_CASE("check: example1 full suite passes") {
  const auto dir = scratch("full");
  const auto r = run({"check", "--out", dir.string()});
  CHECK(r.code == 0);
  const auto rep = read_json(dir / "check_report.json");
  REQUIRE(rep["checks"].size() == pbw::cli::known_checks().size());
  for (std::size_t i = 0; i < rep["checks"].size(); ++i) {
    const auto& c = rep["checks"][i];
    INFO(c.dump());
    CHECK(c["name"] == pbw::cli::known_checks()[i]);
    CHECK(c["verdict"] == "pass");
    CHECK(c["inputs_digest"].get<std::string>().size() == 16);
  }
  CHECK(rep["summary"]["verdict"] == "pass");
  // Stable key order.
  std::vector<std::string> keys;
  for (const auto& [k, v] : rep.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"tool", "command", "model", "settings", "checks", "summary", "timing"});
  CHECK(fs::exists(dir / "quasi_basis_trace.csv"));
}

TEST_CASE("check: broken model blocks downstream checks") {
  const auto dir = scratch("broken");
  const auto cfg = write_config(dir, "[model]\nalpha_a = \"1\"\nbeta_a = \"x\"\nalpha_b = \"x\"\nbeta_b = \"0\"\n");
  const auto r = run({"check", "--config", cfg.string(), "--out", dir.string()});
  CHECK(r.code == 1);
  const auto rep = read_json(dir / "check_report.json");
  CHECK(rep["checks"][0]["name"] == "conditions");
  CHECK(rep["checks"][0]["verdict"] == "fail");
  for (const auto& c : rep["checks"]) {
    if (c["name"] == "conditions" || c["name"] == "moments") continue;
    INFO(c["name"]);
    CHECK(c["verdict"] == "blocked");
  }
  CHECK(rep["summary"]["verdict"] == "fail");
}

TEST_CASE("check: empty list gives an empty passing report") {
  const auto dir = scratch("empty");
  const auto cfg = write_config(dir, "; comment line\n[checks]\nlist =\n");
  const auto r = run({"check", "--config", cfg.string(), "--out", dir.string()});
  CHECK(r.code == 0);
  const auto rep = read_json(dir / "check_report.json");
  CHECK(rep["checks"].empty());
  CHECK(rep["summary"]["total"] == 0);
}

TEST_CASE("exit status 2 for configuration errors") {
  const auto dir = scratch("errors");
  const std::vector<std::string> bad{
      "[grid]\npoints = 1\n",
      "[grid]\nlo = 2\nhi = 1\n",
      "[model]\nbuiltin = example2\ntypo = 3\n",
      "[nosuch]\nkey = 1\n",
      "[model]\nalpha = \"1/(1+x^2\"\n",
      "[model]\nbuiltin = nosuch\n",
      "[model]\nalpha_a = \"1\"\nbeta_a = \"x\"\n",
      "[model]\nbuiltin = example1\nalpha = \"1\"\n",
      "[tolerances]\neigen = -1\n",
      "[tolerances]\neigen = abc\n",
      "[checks]\nlist = conditions, nosuch\n",
      "[run]\nn_max = 2.5\n",
      "[bicoherent]\nradius = 0\n",
      "[bicoherent]\ntrace = 1, 7\n",
      "[quasi_basis]\nwidth_lo = 2\nwidth_hi = 1\n",
      "toplevel = 1\n",
      "[grid\npoints = 3\n",
  };
  for (const auto& text : bad) {
    const auto cfg = write_config(dir, text);
    const auto r = run({"check", "--config", cfg.string(), "--out", (dir / "o").string()});
    INFO(text);
    CHECK(r.code == 2);
    CHECK(r.err.find("pbw:") != std::string::npos);
  }
  CHECK(run({"check", "--config", (dir / "missing.ini").string()}).code == 2);
  CHECK(run({"check", "--bogus"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"check", "--tol-scale", "0", "--out", dir.string()}).code == 2);
  CHECK(run({"check", "--jobs", "-1", "--out", dir.string()}).code == 2);
  CHECK(run({"check", "--out", dir.string()}, {{"PBW_GRID__POINTS", "1"}}).code == 2);
  CHECK(run({"check", "--out", dir.string()}, {{"PBW_NOSUCH__KEY", "1"}}).code == 2);
  CHECK(run({"check", "--out", dir.string()}, {{"PBW_TOL_SCALE", "x"}}).code == 2);
  // Output path that is a regular file.
  std::ofstream(dir / "file") << "x";
  CHECK(run({"states", "--out", (dir / "file").string()}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("tolerance scale and environment overrides") {
  const auto dir = scratch("env");
  const auto cfg = write_config(dir, "[checks]\nlist = moments, conditions\n[run]\nn_max = 3\n");
  const auto strict = run({"check", "--config", cfg.string(), "--out", dir.string(), "--tol-scale", "1e-30"});
  CHECK(strict.code == 1);
  CHECK(strict.out.find("FAIL moments") != std::string::npos);

  const auto env = run({"check", "--out", dir.string()},
                       {{"PBW_CONFIG", cfg.string()}, {"PBW_RUN__N_MAX", "2"}, {"PBW_TOL_SCALE", "2"}});
  CHECK(env.code == 0);
  const auto rep = read_json(dir / "check_report.json");
  CHECK(rep["settings"]["n_max"] == 2);
  CHECK(rep["settings"]["tol_scale"] == 2.0);
  CHECK(rep["checks"][0]["tolerance"] == doctest::Approx(2e-10));

  // Flags win over the environment.
  run({"check", "--out", dir.string(), "--tol-scale", "3"}, {{"PBW_CONFIG", cfg.string()}, {"PBW_TOL_SCALE", "2"}});
  CHECK(read_json(dir / "check_report.json")["settings"]["tol_scale"] == 3.0);

  // PBW_OUT picks the directory.
  const auto other = scratch("env_out");
  CHECK(run({"check"}, {{"PBW_CONFIG", cfg.string()}, {"PBW_OUT", other.string()}}).code == 0);
  CHECK(fs::exists(other / "check_report.json"));
}

TEST_CASE("reports are deterministic apart from timing") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  const std::string text = "[checks]\nlist = quasi_basis, transforms, commutator\n[quasi_basis]\npairs = 2\nterms = 12\n[tolerances]\nquasi_basis = 0.1\n";
  const auto cfg = write_config(a, text);
  REQUIRE(run({"check", "--config", cfg.string(), "--out", a.string(), "--jobs", "1"}).code == 0);
  REQUIRE(run({"check", "--config", cfg.string(), "--out", b.string(), "--jobs", "3"}).code == 0);
  const auto ra = read_json(a / "check_report.json"), rb = read_json(b / "check_report.json");
  CHECK(ra.contains("timing"));
  CHECK(without_timing(ra).dump() == without_timing(rb).dump());
  std::string ca, cb;
  read_csv(a / "quasi_basis_trace.csv", &ca);
  read_csv(b / "quasi_basis_trace.csv", &cb);
  CHECK(ca == cb);

  const auto c = scratch("det_c");
  run({"check", "--config", cfg.string(), "--out", c.string()}, {{"PBW_RUN__SEED", "7"}});
  const auto rc = read_json(c / "check_report.json");
  CHECK(rc["checks"][0]["inputs_digest"] != ra["checks"][0]["inputs_digest"]);
  CHECK(rc["checks"][0]["details"]["bumps"] != ra["checks"][0]["details"]["bumps"]);
}

TEST_CASE("states: CSV shape and values") {
  const auto dir = scratch("states");
  const auto cfg = write_config(dir, "[model]\nbuiltin = example2\n[run]\nn_max = 4\n[grid]\nlo = -2\nhi = 2\npoints = 101\n");
  REQUIRE(run({"states", "--config", cfg.string(), "--out", dir.string()}).code == 0);
  const auto model = pbw::example2();
  for (const auto& [tag, side] : {std::pair{"phi", pbw::Side::phi}, std::pair{"psi", pbw::Side::psi}}) {
    std::string raw;
    const auto rows = read_csv(dir / (std::string("states_") + tag + ".csv"), &raw);
    CHECK(raw.find('\r') == std::string::npos);
    REQUIRE(rows.size() == 102);
    CHECK(rows[0].size() == 11);
    CHECK(rows[0][0] == "x");
    CHECK(rows[0][1] == std::string("re_") + tag + "_0");
    CHECK(rows[0][10] == std::string("im_") + tag + "_4");
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].size() == 11);
    // x = 0 is the middle row; full precision round-trips exactly.
    const auto& mid = rows[51];
    CHECK(std::strtod(mid[0].c_str(), nullptr) == 0.0);
    const pbw::StateFamily fam(model, side, 4);
    for (int n = 0; n <= 4; ++n) {
      const pbw::cplx v = pbw::eval_state(fam, n, 0.0, 0)[0];
      CHECK(std::strtod(mid[static_cast<std::size_t>(1 + 2 * n)].c_str(), nullptr) == v.real());
      CHECK(std::strtod(mid[static_cast<std::size_t>(2 + 2 * n)].c_str(), nullptr) == v.imag());
    }
  }
  const auto rep = read_json(dir / "states_report.json");
  CHECK(rep["files"][0]["rows"] == 101);

  const auto vac = scratch("states_vacuum");
  const auto cfg0 = write_config(vac, "[run]\nn_max = 0\n[grid]\npoints = 5\n");
  REQUIRE(run({"states", "--config", cfg0.string(), "--out", vac.string()}).code == 0);
  const auto rows = read_csv(vac / "states_phi.csv");
  CHECK(rows.size() == 6);
  CHECK(rows[0] == std::vector<std::string>{"x", "re_phi_0", "im_phi_0"});
}

TEST_CASE("states for a model given by expressions") {
  const auto dir = scratch("states_expr");
  const auto cfg = write_config(dir, "[model]\nalpha = \"1/(1+x^2)\"\n[run]\nn_max = 2\n[grid]\npoints = 3\n");
  REQUIRE(run({"states", "--config", cfg.string(), "--out", dir.string()}).code == 0);
  const auto rep = read_json(dir / "states_report.json");
  CHECK(rep["model"]["source"] == "equal_alpha");
  // Numerical normalization agrees with the known constant 1/sqrt(2 pi).
  CHECK(rep["norm_product"][0].get<double>() == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-10));
}

TEST_CASE("bicoherent: pairing table and resolution row") {
  const auto dir = scratch("bicoherent");
  const auto r = run({"bicoherent", "--out", dir.string()});
  CHECK(r.code == 0);
  const auto rows = read_csv(dir / "bicoherent_pairings.csv");
  REQUIRE(rows.size() == 26);
  CHECK(rows[0].size() == 12);
  const auto rep = read_json(dir / "bicoherent_report.json");
  const auto& checks = rep["checks"];
  REQUIRE(checks.size() == 3);
  CHECK(checks[1]["name"] == "eigen_relation");
  const double tol = checks[1]["tolerance"].get<double>();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::strtod(rows[i][10].c_str(), nullptr) <= tol);
    CHECK(std::strtod(rows[i][11].c_str(), nullptr) <= tol);
  }
  const auto& res = checks[2];
  CHECK(res["name"] == "resolution");
  CHECK(res["details"].contains("phi_psi"));
  CHECK(res["details"].contains("psi_phi"));
  CHECK(res["details"].contains("exact"));
  CHECK(res["details"]["monotone_trace"] == true);
  CHECK(read_csv(dir / "resolution_trace.csv").size() == 7);
}

TEST_CASE("hamiltonian: coefficient table and cross-check") {
  const auto dir = scratch("hamiltonian");
  const auto cfg = write_config(dir, "[model]\nbuiltin = constant_alpha\nparams = 1, 1, 0.4\n[grid]\npoints = 11\n");
  REQUIRE(run({"hamiltonian", "--config", cfg.string(), "--out", dir.string()}).code == 0);
  const auto rows = read_csv(dir / "hamiltonian.csv");
  REQUIRE(rows.size() == 12);
  CHECK(rows[0].size() == 13);
  // k1 = k - x at x = -3.
  CHECK(std::strtod(rows[1][3].c_str(), nullptr) == doctest::Approx(3.4).epsilon(1e-15));
  const auto rep = read_json(dir / "hamiltonian_report.json");
  CHECK(rep["checks"][0]["details"]["printed"] == "constant_k");
  CHECK(rep["checks"][0]["verdict"] == "pass");

  const auto sw = scratch("hamiltonian_sw");
  const auto cfg2 = write_config(sw, "[model]\nbuiltin = swanson\nparams = 0.2\n[grid]\npoints = 4\n");
  REQUIRE(run({"hamiltonian", "--config", cfg2.string(), "--out", sw.string()}).code == 0);
  CHECK(read_json(sw / "hamiltonian_report.json")["checks"][0]["verdict"] == "skipped");
}
