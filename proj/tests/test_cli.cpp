#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kinklab/commands.hpp"
#include "kinklab/config.hpp"
#include "kinklab/errors.hpp"

using namespace kinklab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("kinklab_test_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig kink_config(const fs::path& out) {
  RunConfig cfg = parse_config(R"({
    "potential": {"name": "ratchet-cm", "params": {"b2": 5.0}},
    "k_values": [0.5, 0.1],
    "grid_n": 201
  })");
  cfg.output_path = out;
  return cfg;
}

}  // namespace

TEST_CASE("config parsing fills documented defaults") {
  const RunConfig cfg = parse_config(R"({"potential": {"name": "quartic"}, "k_values": [0.1]})");
  REQUIRE(cfg.potential);
  CHECK(cfg.potential->name == "quartic");
  CHECK(cfg.ell == 1.0);
  CHECK(cfg.grid_n == 2047);
  CHECK(cfg.kink_tol.quad_tol == 1e-9);
  CHECK(cfg.kink_tol.root_rel_tol == 1e-10);
  CHECK(cfg.newton.tol == 1e-10);
  CHECK(cfg.output_format == OutputFormat::csv);
  CHECK_FALSE(cfg.poro);
}

TEST_CASE("config parsing reads overrides") {
  const RunConfig cfg = parse_config(R"({
    "poro": {"k_ratios": [1, 0.5, 0.25], "p": 0.3},
    "ell": 2, "grid_n": 99, "output_format": "json",
    "tolerances": {"quad_tol": 1e-8, "newton_tol": 1e-9, "newton_max_iter": 7},
    "u_levels": [0.1, 0.9]
  })");
  REQUIRE(cfg.poro);
  CHECK(cfg.poro->material.k2 == 0.5);
  CHECK(cfg.poro->material.alpha == 100.0);
  CHECK(*cfg.poro->p == 0.3);
  CHECK(cfg.ell == 2.0);
  CHECK(cfg.grid_n == 99);
  CHECK(cfg.output_format == OutputFormat::json);
  CHECK(cfg.kink_tol.quad_tol == 1e-8);
  CHECK(cfg.newton.tol == 1e-9);
  CHECK(cfg.newton.max_iter == 7);
  CHECK(cfg.u1_fraction == 0.1);
}

TEST_CASE("malformed configs raise ConfigError") {
  const char* bad[] = {
      "not json",
      "[1, 2]",
      R"({"mystery": 1})",
      R"({"potential": {"name": "sextic"}})",
      R"({"potential": {"name": "quartic", "params": {"b1": 1}}})",
      R"({"potential": {"name": "ratchet-cm", "params": {"b1": -1}}})",
      R"({"k_values": [0.1, -0.1]})",
      R"({"k_values": "0.1"})",
      R"({"grid_n": 2})",
      R"({"grid_n": 10.5})",
      R"({"ell": 0})",
      R"({"output_format": "xml"})",
      R"({"tolerances": {"quad_tol": 0}})",
      R"({"poro": {"alpha": -1}})",
      R"({"poro": {"k_ratios": [1, 1]}})",
      R"({"u_levels": [0.8, 0.2]})",
  };
  for (const char* text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS(parse_config(text), ConfigError);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/kinklab.json"), ConfigError);
}

TEST_CASE("kink command writes profiles and a summary") {
  TempDir dir("kink");
  std::ostringstream out;
  std::ostringstream err;
  REQUIRE(cmd_kink(kink_config(dir.path), out, err) == kExitOk);
  CHECK(err.str().empty());
  for (const char* name : {"profile_k0.5.csv", "profile_k0.1.csv"}) {
    const std::string text = slurp(dir.path / name);
    CHECK(text.rfind("x,u\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 202);
  }
  const auto summary = nlohmann::json::parse(slurp(dir.path / "summary.json"));
  REQUIRE(summary.size() == 2);
  for (const char* key : {"k", "E_k", "x_i_k", "x_i_0", "weighted_residual", "width_u1_u2"})
    CHECK(summary[0].contains(key));
  CHECK(summary[1]["k"] == 0.1);
  CHECK(summary[1]["width_u1_u2"].get<double>() < summary[0]["width_u1_u2"].get<double>());
}

TEST_CASE("kink command output is byte-identical across runs") {
  TempDir a("det_a");
  TempDir b("det_b");
  std::ostringstream out_a, out_b, err;
  REQUIRE(cmd_kink(kink_config(a.path), out_a, err) == kExitOk);
  REQUIRE(cmd_kink(kink_config(b.path), out_b, err) == kExitOk);
  CHECK(out_a.str() == out_b.str());
  for (const char* name : {"profile_k0.5.csv", "profile_k0.1.csv", "summary.json"})
    CHECK(slurp(a.path / name) == slurp(b.path / name));
}

TEST_CASE("kink command honours json output") {
  TempDir dir("json");
  RunConfig cfg = kink_config(dir.path);
  cfg.output_format = OutputFormat::json;
  std::ostringstream out, err;
  REQUIRE(cmd_kink(cfg, out, err) == kExitOk);
  const auto prof = nlohmann::json::parse(slurp(dir.path / "profile_k0.5.json"));
  CHECK(prof["x"].size() == 201);
  CHECK(prof["u"].size() == 201);
}

TEST_CASE("kink command exit codes") {
  TempDir dir("codes");
  std::ostringstream out, err;
  RunConfig cfg = kink_config(dir.path);
  cfg.k_values.clear();
  CHECK(cmd_kink(cfg, out, err) == kExitConfigError);
  CHECK(err.str().find("k_values") != std::string::npos);

  RunConfig no_pot;
  no_pot.k_values = {0.1};
  CHECK(cmd_kink(no_pot, out, err) == kExitConfigError);

  RunConfig starved = kink_config(dir.path);
  starved.kink_tol.max_panels = 1;
  starved.kink_tol.quad_tol = 1e-15;
  std::ostringstream err2;
  CHECK(cmd_kink(starved, out, err2) == kExitSolverError);
  CHECK(err2.str().find("failed") != std::string::npos);
}

TEST_CASE("poro command: coexistence, predict and the non-degenerate path") {
  std::ostringstream out, err;
  RunConfig cfg = parse_config(R"({"poro": {}})");
  REQUIRE(cmd_poro(cfg, PoroAction::coexistence, out, err) == kExitOk);
  const auto co = nlohmann::json::parse(out.str());
  CHECK(co["p_co"].get<double>() == doctest::Approx(0.2422091576).epsilon(1e-9));

  std::ostringstream pred;
  REQUIRE(cmd_poro(cfg, PoroAction::predict, pred, err) == kExitOk);
  CHECK(std::abs(nlohmann::json::parse(pred.str())["x_i_0"].get<double>() - 0.6164) <= 1e-3);

  const RunConfig graded =
      parse_config(R"({"poro": {"k_ratios": [1, 0.5, 0.3333333333333333]}})");
  std::ostringstream out3, err3;
  CHECK(cmd_poro(graded, PoroAction::predict, out3, err3) == kExitSolverError);
  CHECK(err3.str().find("degenerate reduction") != std::string::npos);

  std::ostringstream out4, err4;
  CHECK(cmd_poro(RunConfig{}, PoroAction::phases, out4, err4) == kExitConfigError);
}

TEST_CASE("poro phases lists one row per phase") {
  std::ostringstream out, err;
  const RunConfig cfg = parse_config(R"({"poro": {"p_values": [0.05, 0.5]}})");
  REQUIRE(cmd_poro(cfg, PoroAction::phases, out, err) == kExitOk);
  const std::string text = out.str();
  CHECK(text.rfind("p,phase,m,eps,psi\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}

TEST_CASE("poro kink writes two-field profiles") {
  TempDir dir("poro");
  RunConfig cfg = parse_config(R"({"poro": {}, "k_values": [0.1], "grid_n": 255})");
  cfg.output_path = dir.path;
  std::ostringstream out, err;
  REQUIRE(cmd_poro(cfg, PoroAction::kink, out, err) == kExitOk);
  CHECK(slurp(dir.path / "profile_k0.1.csv").rfind("x,eps,m\n", 0) == 0);
  const auto summary = nlohmann::json::parse(slurp(dir.path / "summary.json"));
  CHECK(summary["rows"].size() == 1);
  CHECK(summary["rows"][0]["eps_crossing"].is_number());
}

TEST_CASE("selftest passes and is deterministic") {
  std::ostringstream a, b;
  CHECK(cmd_selftest(a) == kExitOk);
  CHECK(cmd_selftest(b) == kExitOk);
  CHECK(a.str() == b.str());
  for (const auto& c : run_selftest()) {
    CAPTURE(c.name);
    CHECK(c.passed);
  }
}

TEST_CASE("format_k is the shortest round-trip text") {
  CHECK(format_k(0.1) == "0.1");
  CHECK(format_k(3.0) == "3");
  CHECK(format_k(0.45) == "0.45");
  CHECK(format_k(1e-3) == "0.001");
}
