#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stm/system.hpp"

namespace stm {

/// Thrown by the config parser; the message lists every violation, one per line.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::vector<std::string>& problems);
  [[nodiscard]] const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct ExperimentConfig {
  // problem
  std::string data = "heat";  // heat | quasilinear | zero
  std::string mu = "constant";
  std::vector<Real> mu_params;
  Real final_time = 1.0;

  // discretization
  int time_elements = 4;
  int space_elements = 4;
  BasisFamily test_time_family = BasisFamily::DiscontinuousP1;
  int test_refinements = 0;
  int levels = 4;
  int reference_refinements = 2;

  // solver
  std::optional<Real> sigma_hat_S;
  Real tol = 1e-8;
  int max_outer = 2000;
  std::optional<int> L_practical;
  Real reference_tol = 1e-12;

  // quality
  Real rho = 1.0;
  int max_levels = 4;
  int surrogate_refinements = 2;

  // precond
  int precond_first_level = 1;
  int precond_last_level = 5;

  // output
  std::string out_dir = ".";
  int precision = 17;
  std::uint64_t seed = 1;
};

[[nodiscard]] ExperimentConfig parse_config_text(const std::string& text);
[[nodiscard]] ExperimentConfig parse_config(const std::filesystem::path& path);

/// Every key the parser accepts, with its default as text.
[[nodiscard]] const std::map<std::string, std::string>& config_defaults();

[[nodiscard]] ProblemSpec make_problem(const ExperimentConfig& cfg);

[[nodiscard]] const std::vector<std::string>& subcommand_names();

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNoConvergence = 3, kExitNumeric = 4 };

/// Runs one subcommand, writes its CSV into cfg.out_dir and a short summary to `log`.
/// Library exceptions are mapped to exit codes; the message goes to `err`.
[[nodiscard]] int run_subcommand(const std::string& name, const ExperimentConfig& cfg, std::ostream& log,
                                 std::ostream& err);

/// Least-squares slope of -log(err) against log(1/h), h halving per entry.
[[nodiscard]] Real measured_rate(const std::vector<Real>& errors);

}  // namespace stm
