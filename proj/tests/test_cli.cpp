#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "svol/config.hpp"
#include "svol/runner.hpp"

namespace fs = std::filesystem;
using svol::cli::RunConfig;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("svol_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::string heston_config(const std::string& outdir, const std::string& task) {
  std::ostringstream os;
  os << "task = " << task << "\n"
     << "model.name = heston\n"
     << "model.mu = 0.3 - 2*y\n"
     << "model.sigma = 0.4*sqrt(y)\n"
     << "model.b = sqrt(y)\n"
     << "model.rho = -0.5\n"
     << "payoff.type = call\n"
     << "payoff.strike = 1.0\n"
     << "x0 = 1.0\n"
     << "y0 = 0.04\n"
     << "maturity = 1.0\n"
     << "output.dir = " << outdir << "\n";
  return os.str();
}

std::string write_config(const TempDir& dir, const std::string& text) {
  const fs::path p = dir.path / "run.conf";
  std::ofstream os(p);
  os << text;
  return p.string();
}

nlohmann::json read_report(const fs::path& dir) {
  std::ifstream is(dir / "report.json");
  REQUIRE(is.good());
  nlohmann::json j;
  is >> j;
  return j;
}

}  // namespace

TEST_CASE("config parsing: unknown keys are hard errors") {
  CHECK_THROWS_AS(svol::cli::parse_config_text("task = validate\nmodel.mux = y\n", {}),
                  svol::cli::ConfigError);
  // overrides are validated too
  CHECK_THROWS_AS(svol::cli::parse_config_text("task = validate\n", {"no.such=1"}),
                  svol::cli::ConfigError);
}

TEST_CASE("config parsing: comments, spacing, lists, overrides") {
  const RunConfig cfg = svol::cli::parse_config_text(
      "# a comment\n"
      "task = classify   # trailing\n"
      "mc.barriers = 100, 1000, 10000\n"
      "model.rho = -0.5\n",
      {"model.rho=0.25"});
  CHECK(cfg.get_string("task") == "classify");
  CHECK(cfg.get_double("model.rho") == 0.25);
  const std::vector<double> b = cfg.get_double_list("mc.barriers");
  REQUIRE(b.size() == 3);
  CHECK(b[2] == 10000.0);
}

TEST_CASE("classify task end to end") {
  TempDir dir;
  const std::string cfg_path =
      write_config(dir, heston_config((dir.path / "out").string(), "classify"));
  const svol::cli::RunResult res = svol::cli::run_file(cfg_path, {});
  CHECK(res.exit_code == 0);
  const nlohmann::json j = read_report(dir.path / "out");
  CHECK(j["classification"]["martingale"] == "Martingale");
  CHECK(j["classification"]["uniqueness"] == "Unique");
  CHECK(j["task"] == "classify");
  CHECK(j.contains("config"));
}

TEST_CASE("missing required key exits 2") {
  TempDir dir;
  std::string text = heston_config((dir.path / "out").string(), "classify");
  // drop the sigma line
  const std::size_t at = text.find("model.sigma");
  text.erase(at, text.find('\n', at) - at + 1);
  const svol::cli::RunResult res = svol::cli::run_file(write_config(dir, text), {});
  CHECK(res.exit_code == 2);
}

TEST_CASE("validation failure exits 2 with a report") {
  TempDir dir;
  std::string text = heston_config((dir.path / "out").string(), "classify");
  const svol::cli::RunResult res =
      svol::cli::run_file(write_config(dir, text), {"model.b=1+y"});
  CHECK(res.exit_code == 2);
  const nlohmann::json j = read_report(dir.path / "out");
  CHECK(j["validation"]["hard_ok"] == false);
}

TEST_CASE("demo on a martingale model exits 3") {
  TempDir dir;
  std::string text = heston_config((dir.path / "out").string(), "demo");
  text += "grid.nx = 50\ngrid.ny = 50\ngrid.steps = 20\n";
  const svol::cli::RunResult res =
      svol::cli::run_file(write_config(dir, text),
                          {"payoff.type=identity"});
  CHECK(res.exit_code == 3);
  const nlohmann::json j = read_report(dir.path / "out");
  CHECK(j["demo"]["refused"] == true);
}

TEST_CASE("price task requires an explicit seed") {
  TempDir dir;
  std::string text = heston_config((dir.path / "out").string(), "price");
  text += "mc.paths = 2000\nmc.steps = 20\n";
  const svol::cli::RunResult no_seed = svol::cli::run_file(write_config(dir, text), {});
  CHECK(no_seed.exit_code == 2);
  const svol::cli::RunResult with_seed =
      svol::cli::run_file(write_config(dir, text), {"mc.seed=42"});
  CHECK(with_seed.exit_code == 0);
}

TEST_CASE("reports are byte-identical across reruns") {
  TempDir dir;
  std::string text = heston_config((dir.path / "out").string(), "price");
  text += "mc.paths = 5000\nmc.steps = 20\nmc.seed = 7\n";
  const std::string cfg_path = write_config(dir, text);
  REQUIRE(svol::cli::run_file(cfg_path, {}).exit_code == 0);
  std::ifstream f1(dir.path / "out" / "report.json");
  std::stringstream s1;
  s1 << f1.rdbuf();
  REQUIRE(svol::cli::run_file(cfg_path, {}).exit_code == 0);
  std::ifstream f2(dir.path / "out" / "report.json");
  std::stringstream s2;
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());
  CHECK(fs::exists(dir.path / "out" / "metadata.json"));
}

TEST_CASE("defect task writes the survival profile") {
  TempDir dir;
  std::string text =
      "task = defect\n"
      "model.mu = 0\n"
      "model.sigma = 2*y\n"
      "model.b = y\n"
      "model.rho = 0.5\n"
      "x0 = 1.0\ny0 = 1.0\nmaturity = 1.0\n"
      "grid.ny = 120\ngrid.steps = 60\n"
      "output.dir = " + (dir.path / "out").string() + "\n";
  const svol::cli::RunResult res = svol::cli::run_file(write_config(dir, text), {});
  CHECK(res.exit_code == 0);
  CHECK(fs::exists(dir.path / "out" / "survival_profile.csv"));
  const nlohmann::json j = read_report(dir.path / "out");
  CHECK(j["defect_at_eval"].get<double>() > 0.01);
}

TEST_CASE("sweep writes one row per point and keeps going on errors") {
  TempDir dir;
  std::string text =
      "task = sweep\n"
      "sweep.task = classify\n"
      "sweep.param = model.rho\n"
      "sweep.values = -0.5, 0, 0.25, 0.5\n"
      "model.name = hull-white\n"
      "model.mu = -1*y\n"
      "model.sigma = 0.5*y\n"
      "model.b = sqrt(y)\n"
      "model.rho = 0\n"
      "payoff.type = call\npayoff.strike = 1\n"
      "x0 = 1.0\ny0 = 1.0\nmaturity = 1.0\n"
      "output.dir = " + (dir.path / "out").string() + "\n";
  const svol::cli::RunResult res = svol::cli::run_file(write_config(dir, text), {});
  CHECK(res.exit_code == 0);
  std::ifstream csv(dir.path / "out" / "sweep.csv");
  REQUIRE(csv.good());
  std::string line;
  std::getline(csv, line);   // header
  int rows = 0;
  int flips = 0;
  std::string prev;
  while (std::getline(csv, line)) {
    ++rows;
    const bool strict = line.find("StrictLocalMartingale") != std::string::npos;
    const std::string cur = strict ? "slm" : "mart";
    if (!prev.empty() && cur != prev) ++flips;
    prev = cur;
  }
  CHECK(rows == 4);
  CHECK(flips == 1);   // verdict flips exactly once, at rho > 0
}

TEST_CASE("empty sweep range produces an empty table") {
  TempDir dir;
  std::string text =
      "task = sweep\n"
      "sweep.task = classify\n"
      "sweep.param = model.rho\n"
      "sweep.values = ,\n"
      "model.mu = 0.3-2*y\nmodel.sigma = 0.4*sqrt(y)\nmodel.b = sqrt(y)\n"
      "model.rho = 0\n"
      "payoff.type = call\npayoff.strike = 1\n"
      "output.dir = " + (dir.path / "out").string() + "\n";
  const svol::cli::RunResult res = svol::cli::run_file(write_config(dir, text), {});
  CHECK(res.exit_code == 0);
  std::ifstream csv(dir.path / "out" / "sweep.csv");
  std::string line;
  int rows = -1;   // discount header
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 0);
}

TEST_CASE("cli binary runs a config") {
#ifdef SVOL_CLI_PATH
  TempDir dir;
  const std::string cfg_path =
      write_config(dir, heston_config((dir.path / "out").string(), "classify"));
  const std::string cmd = std::string(SVOL_CLI_PATH) + " run " + cfg_path +
                          " --set model.rho=0.5 > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(rc) == 0);
  const nlohmann::json j = read_report(dir.path / "out");
  CHECK(j["classification"]["martingale"] == "Martingale");
#endif
}
