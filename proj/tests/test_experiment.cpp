#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "stm/experiment.hpp"

using namespace stm;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("stm_unit_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("minimal config takes the defaults") {
  const ExperimentConfig cfg = parse_config_text("problem.data = heat\n");
  CHECK(cfg.time_elements == 4);
  CHECK(cfg.tol == 1e-8);
  CHECK(cfg.test_time_family == BasisFamily::DiscontinuousP1);
  CHECK_FALSE(cfg.sigma_hat_S.has_value());
  CHECK(cfg.precision == 17);
  CHECK(config_defaults().count("solver.tol") == 1);
}

TEST_CASE("comments, spacing and lists") {
  const ExperimentConfig cfg = parse_config_text(
      "# study\nproblem.data = zero   # trailing\nproblem.mu = bounded-ramp\nproblem.mu_params = 1, 0.5\n"
      "solver.L = 12\nrandom.seed = 0x10\n");
  CHECK(cfg.mu_params.size() == 2);
  CHECK(cfg.mu_params[1] == 0.5);
  CHECK(cfg.L_practical == 12);
  CHECK(cfg.seed == 16);
}

TEST_CASE("errors name every offending key") {
  try {
    (void)parse_config_text("problem.data = zero\nproblem.mu = cubic\nsolver.tol = -1\nmesh.time_elements = x\nbogus = 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(e.problems().size() == 4);
    CHECK(msg.find("problem.mu") != std::string::npos);
    CHECK(msg.find("solver.tol") != std::string::npos);
    CHECK(msg.find("mesh.time_elements") != std::string::npos);
    CHECK(msg.find("bogus: unknown key") != std::string::npos);
  }
  CHECK_THROWS_AS((void)parse_config_text("problem.data = heat\nproblem.mu = one-plus-inv\n"), ConfigError);
  CHECK_THROWS_AS((void)parse_config_text("not a pair\n"), ConfigError);
  CHECK_THROWS_AS((void)parse_config(std::filesystem::path("/nonexistent/file.cfg")), ConfigError);
}

TEST_CASE("measured rate of an exact power law") {
  CHECK(measured_rate({1.0, 0.5, 0.25, 0.125}) == doctest::Approx(1.0));
  CHECK(measured_rate({1.0, 0.25, 0.0625}) == doctest::Approx(2.0));
}

TEST_CASE("constants subcommand prints the bundle") {
  ExperimentConfig cfg = parse_config_text("problem.data = heat\n");
  cfg.out_dir = scratch("constants").string();
  std::ostringstream log, err;
  CHECK(run_subcommand("constants", cfg, log, err) == kExitOk);
  const std::string out = log.str();
  CHECK(out.find("L_A = 3\n") != std::string::npos);
  CHECK(out.find("m_A = 1\n") != std::string::npos);
  CHECK(out.find("L_N = 4\n") != std::string::npos);
  CHECK(out.find("m_S = 0.1111111111111111\n") != std::string::npos);
  CHECK(out.find("L = 73\n") != std::string::npos);
}

TEST_CASE("uzawa-trace with zero data has one row and is deterministic") {
  ExperimentConfig cfg = parse_config_text("problem.data = zero\nproblem.mu = one-plus-inv\n");
  cfg.out_dir = scratch("zero").string();
  std::ostringstream log, err;
  REQUIRE(run_subcommand("uzawa-trace", cfg, log, err) == kExitOk);
  const std::string first = slurp(std::filesystem::path(cfg.out_dir) / "uzawa_trace.csv");
  std::istringstream lines(first);
  std::string header, row, extra;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK_FALSE(static_cast<bool>(std::getline(lines, extra)));
  CHECK(row.rfind("0,0,0,0,", 0) == 0);
  REQUIRE(run_subcommand("uzawa-trace", cfg, log, err) == kExitOk);
  CHECK(slurp(std::filesystem::path(cfg.out_dir) / "uzawa_trace.csv") == first);
}

TEST_CASE("exit codes for non-convergence and bad subcommands") {
  ExperimentConfig cfg = parse_config_text("problem.data = heat\nsolver.max_outer = 2\nsolver.L = 1\n");
  cfg.out_dir = scratch("cap").string();
  std::ostringstream log, err;
  CHECK(run_subcommand("uzawa-trace", cfg, log, err) == kExitNoConvergence);
  CHECK(run_subcommand("plot", cfg, log, err) == kExitConfig);
  cfg.sigma_hat_S = 0.5;
  CHECK(run_subcommand("constants", cfg, log, err) == kExitConfig);
}
