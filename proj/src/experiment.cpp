#include "stm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "stm/precond.hpp"
#include "stm/quality.hpp"
#include "stm/uzawa.hpp"

namespace stm {

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out = "invalid configuration:";
  for (const std::string& l : lines) out += "\n  " + l;
  return out;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

class Reader {
 public:
  explicit Reader(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  std::optional<std::string> raw(const std::string& key) {
    seen_.push_back(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  void real(const std::string& key, Real& out) {
    if (auto v = raw(key)) parse_real(key, *v, out);
  }

  void real(const std::string& key, std::optional<Real>& out) {
    if (auto v = raw(key)) {
      Real x = 0.0;
      if (parse_real(key, *v, x)) out = x;
    }
  }

  void integer(const std::string& key, int& out) {
    if (auto v = raw(key)) parse_int(key, *v, out);
  }

  void integer(const std::string& key, std::optional<int>& out) {
    if (auto v = raw(key)) {
      int x = 0;
      if (parse_int(key, *v, x)) out = x;
    }
  }

  void text(const std::string& key, std::string& out) {
    if (auto v = raw(key)) out = *v;
  }

  void reals(const std::string& key, std::vector<Real>& out) {
    const auto v = raw(key);
    if (!v) return;
    out.clear();
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      Real x = 0.0;
      if (parse_real(key, trim(item), x)) out.push_back(x);
    }
  }

  void unsigned64(const std::string& key, std::uint64_t& out) {
    const auto v = raw(key);
    if (!v) return;
    try {
      std::size_t pos = 0;
      const unsigned long long x = std::stoull(*v, &pos, 0);
      if (pos != v->size() || v->front() == '-') throw std::invalid_argument(*v);
      out = x;
    } catch (const std::exception&) {
      fail(key + ": expected a non-negative integer, got '" + *v + "'");
    }
  }

  void fail(std::string message) { problems_.push_back(std::move(message)); }

  void check_unknown() {
    for (const auto& [key, value] : values_) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) fail(key + ": unknown key");
    }
  }

  [[nodiscard]] std::vector<std::string>& problems() { return problems_; }

 private:
  bool parse_real(const std::string& key, const std::string& v, Real& out) {
    try {
      std::size_t pos = 0;
      const Real x = std::stod(v, &pos);
      if (pos != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
      out = x;
      return true;
    } catch (const std::exception&) {
      fail(key + ": expected a real number, got '" + v + "'");
      return false;
    }
  }

  bool parse_int(const std::string& key, const std::string& v, int& out) {
    try {
      std::size_t pos = 0;
      const int x = std::stoi(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      out = x;
      return true;
    } catch (const std::exception&) {
      fail(key + ": expected an integer, got '" + v + "'");
      return false;
    }
  }

  std::map<std::string, std::string> values_;
  std::vector<std::string> seen_;
  std::vector<std::string> problems_;
};

Mesh1D time_mesh(const ExperimentConfig& cfg, int level) {
  return Mesh1D::uniform(0.0, cfg.final_time, cfg.time_elements << level);
}

Mesh1D space_mesh(const ExperimentConfig& cfg, int level) {
  return Mesh1D::uniform(0.0, 1.0, cfg.space_elements << level);
}

TensorSpacePair make_pair(const ExperimentConfig& cfg, const Mesh1D& tm, const Mesh1D& sm) {
  const BasisSpec dirichlet{BasisFamily::ContinuousP1, BoundaryCondition::ZeroDirichlet};
  const Space1D trial_time(tm, BasisSpec{});
  const Space1D test_time(uniform_refine(tm, cfg.test_refinements), BasisSpec{cfg.test_time_family});
  const Space1D trial_space(sm, dirichlet);
  std::optional<Space1D> test_space;
  if (cfg.test_refinements > 0) test_space.emplace(uniform_refine(sm, cfg.test_refinements), dirichlet);
  TensorSpacePair pair = assemble_matrices(trial_time, test_time, trial_space, test_space);
  pair.final_time = cfg.final_time;
  return pair;
}

std::ofstream open_csv(const ExperimentConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream os(std::filesystem::path(cfg.out_dir) / name);
  if (!os) throw std::runtime_error("cannot open " + name + " in " + cfg.out_dir);
  os << std::setprecision(cfg.precision);
  return os;
}

int run_constants(const ExperimentConfig& cfg, std::ostream& log) {
  const ProblemSpec spec = make_problem(cfg);
  const ConstantsBundle b = derive_constants(spec.mu);
  const InnerPlan plan = plan_inner_count(b, cfg.sigma_hat_S.value_or(default_sigma_hat(b)));
  const std::vector<std::pair<std::string, Real>> rows = {
      {"L_A", b.L_A},         {"m_A", b.m_A},
      {"L_N", b.L_N},         {"L_S", b.L_S},
      {"m_S", b.m_S},         {"L_Ninv", b.L_Ninv},
      {"L_Beinv", b.L_Beinv}, {"C_1", b.C_1},
      {"C_PF", b.C_PF},       {"theta_star_A", b.A.theta_star},
      {"sigma_A", b.A.sigma}, {"theta_star_S", b.S.theta_star},
      {"sigma_S", b.S.sigma}, {"sigma_hat_S", plan.sigma_hat_S},
      {"C_3", plan.C_3},      {"L", static_cast<Real>(plan.L)},
  };
  std::ofstream os = open_csv(cfg, "constants.csv");
  os << "name,value\n";
  log << std::setprecision(cfg.precision);
  for (const auto& [name, value] : rows) {
    os << name << ',' << value << '\n';
    log << name << " = " << value << '\n';
  }
  return kExitOk;
}

int run_solve(const ExperimentConfig& cfg, std::ostream& log) {
  const ProblemSpec spec = make_problem(cfg);
  const Discretization disc = make_discretization(make_pair(cfg, time_mesh(cfg, 0), space_mesh(cfg, 0)), spec.mu);
  const ProblemData data = assemble_problem(spec, disc.pair());
  const ReferenceSolution ref = solve_reference(assemble_rhs(data, disc.pair()), disc, cfg.reference_tol);
  const TensorSpace& x = disc.pair().trial;
  std::ofstream os = open_csv(cfg, "solution.csv");
  os << "t,x,u\n";
  for (Index i = 0; i < x.time.dim(); ++i) {
    for (Index j = 0; j < x.space.dim(); ++j) {
      os << x.time.mesh().node(static_cast<int>(i)) << ',' << x.space.mesh().node(static_cast<int>(j + 1)) << ','
         << ref.state.u(x.index(i, j)) << '\n';
    }
  }
  log << std::setprecision(cfg.precision) << "newton_steps = " << ref.iterations << "\nresidual = " << ref.residual
      << "\ngap_lambda_u = " << lambda_u_gap(ref.state, disc)
      << "\ninitial_defect = " << initial_defect(data, disc.pair(), ref.state.u) << '\n';
  return kExitOk;
}

int run_convergence(const ExperimentConfig& cfg, std::ostream& log) {
  const ProblemSpec spec = make_problem(cfg);
  const ConstantsBundle bundle = derive_constants(spec.mu);
  const int last = cfg.levels - 1;
  const FineReference ref =
      make_fine_reference(spec, time_mesh(cfg, last), space_mesh(cfg, last), cfg.reference_refinements);
  std::ofstream os = open_csv(cfg, "convergence.csv");
  os << "level,time_elements,space_elements,dim,err_X,best_X,quasi_opt_ratio,quasi_opt_bound,gap_lambda_u,"
        "initial_defect\n";
  std::vector<Real> errors;
  for (int level = 0; level <= last; ++level) {
    const Mesh1D tm = time_mesh(cfg, level);
    const Mesh1D sm = space_mesh(cfg, level);
    const Discretization disc = make_discretization(make_pair(cfg, tm, sm), spec.mu);
    const ProblemData data = assemble_problem(spec, disc.pair());
    const SaddleState state = solve_reference(assemble_rhs(data, disc.pair()), disc, cfg.reference_tol).state;
    const InfSupReport infsup = infsup_report(disc.pair(), false, cfg.surrogate_refinements);
    const ApproximationErrors err = approximation_errors(ref, disc.pair(), state.u);
    const QuasiOptResult q = quasi_opt_ratio(ref, disc.pair(), state, bundle, infsup);
    errors.push_back(err.error);
    os << level << ',' << tm.elements() << ',' << sm.elements() << ',' << disc.pair().trial_dim() << ',' << err.error
       << ',' << err.best << ',' << q.ratio << ',' << q.bound << ',' << lambda_u_gap(state, disc) << ','
       << initial_defect(data, disc.pair(), state.u) << '\n';
  }
  log << std::setprecision(cfg.precision) << "rate = " << measured_rate(errors) << '\n';
  return kExitOk;
}

int run_uzawa(const ExperimentConfig& cfg, std::ostream& log) {
  const ProblemSpec spec = make_problem(cfg);
  const ConstantsBundle bundle = derive_constants(spec.mu);
  const Discretization disc = make_discretization(make_pair(cfg, time_mesh(cfg, 0), space_mesh(cfg, 0)), spec.mu);
  const ProblemData data = assemble_problem(spec, disc.pair());
  const Rhs rhs = assemble_rhs(data, disc.pair());
  const ReferenceSolution ref = solve_reference(rhs, disc, cfg.reference_tol);
  const UzawaConfig ucfg =
      UzawaConfig::theoretical(bundle, cfg.sigma_hat_S, cfg.tol, cfg.max_outer, cfg.L_practical);
  const UzawaResult res = run_inexact_uzawa(rhs, disc, ucfg, zero_state(disc), &ref.state);
  std::ofstream os = open_csv(cfg, "uzawa_trace.csv");
  res.trace.write_csv(os);
  log << std::setprecision(cfg.precision) << "L = " << ucfg.L << "\nC_3 = " << ucfg.C_3
      << "\nouter_steps = " << res.trace.rows.size() << "\nconverged = " << res.trace.converged << '\n';
  if (!res.trace.converged) throw ConvergenceError("uzawa-trace: tolerance not reached within solver.max_outer steps");
  return kExitOk;
}

int run_infsup(const ExperimentConfig& cfg, std::ostream& log) {
  std::ofstream os = open_csv(cfg, "infsup.csv");
  os << "level,time_elements,space_elements,gamma_t,gamma_x,gamma_lower,gamma_direct\n";
  for (int level = 0; level < cfg.levels; ++level) {
    const Mesh1D tm = time_mesh(cfg, level);
    const Mesh1D sm = space_mesh(cfg, level);
    const InfSupReport r = infsup_report(make_pair(cfg, tm, sm), true, cfg.surrogate_refinements);
    os << level << ',' << tm.elements() << ',' << sm.elements() << ',' << r.gamma_t << ',' << r.gamma_x << ','
       << r.gamma_lower << ',' << *r.gamma_direct << '\n';
  }
  log << "levels = " << cfg.levels << '\n';
  return kExitOk;
}

int run_pjotr(const ExperimentConfig& cfg, std::ostream& log) {
  const ProblemSpec spec = make_problem(cfg);
  const EnrichmentResult res = enrich_until_pjotr(spec, time_mesh(cfg, 0), space_mesh(cfg, 0), cfg.rho,
                                                  cfg.max_levels, cfg.surrogate_refinements);
  std::ofstream os = open_csv(cfg, "pjotr.csv");
  os << "level,lhs,rhs,satisfied,degenerate\n";
  for (std::size_t i = 0; i < res.history.size(); ++i) {
    const PjotrReport& r = res.history[i];
    os << i << ',' << r.lhs << ',' << r.rhs << ',' << int(r.satisfied) << ',' << int(r.degenerate) << '\n';
  }
  log << "satisfied_level = " << res.level << '\n';
  if (res.level < 0) throw ConvergenceError("pjotr: condition not met within quality.max_levels enrichments");
  return kExitOk;
}

int run_precond(const ExperimentConfig& cfg, std::ostream& log) {
  const std::vector<KappaRow> rows = kappa_study(cfg.precond_first_level, cfg.precond_last_level, cfg.final_time);
  std::ofstream os = open_csv(cfg, "kappa.csv");
  write_kappa_csv(os, rows);
  Real lo = std::numeric_limits<Real>::infinity();
  Real hi = 0.0;
  for (const KappaRow& r : rows) {
    lo = std::min(lo, r.kappa);
    hi = std::max(hi, r.kappa);
  }
  log << std::setprecision(cfg.precision) << "kappa_spread = " << hi / lo << '\n';
  return kExitOk;
}

}  // namespace

ConfigError::ConfigError(const std::vector<std::string>& problems)
    : std::runtime_error(join_lines(problems)), problems_(problems) {}

const std::map<std::string, std::string>& config_defaults() {
  static const std::map<std::string, std::string> defaults = {
      {"problem.data", "heat"},
      {"problem.mu", "constant"},
      {"problem.mu_params", ""},
      {"problem.final_time", "1"},
      {"mesh.time_elements", "4"},
      {"mesh.space_elements", "4"},
      {"mesh.test_time_family", "discontinuous-P1"},
      {"mesh.test_refinements", "0"},
      {"study.levels", "4"},
      {"study.reference_refinements", "2"},
      {"solver.sigma_hat_S", "(1 + sigma_S) / 2"},
      {"solver.tol", "1e-8"},
      {"solver.max_outer", "2000"},
      {"solver.L", "theoretical"},
      {"solver.reference_tol", "1e-12"},
      {"quality.rho", "1"},
      {"quality.max_levels", "4"},
      {"quality.surrogate_refinements", "2"},
      {"precond.first_level", "1"},
      {"precond.last_level", "5"},
      {"output.dir", "."},
      {"output.precision", "17"},
      {"random.seed", "1"},
  };
  return defaults;
}

ExperimentConfig parse_config_text(const std::string& text) {
  std::map<std::string, std::string> values;
  std::vector<std::string> syntax;
  std::stringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      syntax.push_back("line " + std::to_string(number) + ": expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    if (values.count(key)) syntax.push_back("line " + std::to_string(number) + ": duplicate key " + key);
    values[key] = trim(line.substr(eq + 1));
  }

  Reader r(std::move(values));
  for (std::string& s : syntax) r.fail(std::move(s));
  ExperimentConfig cfg;
  r.text("problem.data", cfg.data);
  r.text("problem.mu", cfg.mu);
  r.reals("problem.mu_params", cfg.mu_params);
  r.real("problem.final_time", cfg.final_time);
  r.integer("mesh.time_elements", cfg.time_elements);
  r.integer("mesh.space_elements", cfg.space_elements);
  std::string family = "discontinuous-P1";
  r.text("mesh.test_time_family", family);
  r.integer("mesh.test_refinements", cfg.test_refinements);
  r.integer("study.levels", cfg.levels);
  r.integer("study.reference_refinements", cfg.reference_refinements);
  r.real("solver.sigma_hat_S", cfg.sigma_hat_S);
  r.real("solver.tol", cfg.tol);
  r.integer("solver.max_outer", cfg.max_outer);
  r.integer("solver.L", cfg.L_practical);
  r.real("solver.reference_tol", cfg.reference_tol);
  r.real("quality.rho", cfg.rho);
  r.integer("quality.max_levels", cfg.max_levels);
  r.integer("quality.surrogate_refinements", cfg.surrogate_refinements);
  r.integer("precond.first_level", cfg.precond_first_level);
  r.integer("precond.last_level", cfg.precond_last_level);
  r.text("output.dir", cfg.out_dir);
  r.integer("output.precision", cfg.precision);
  r.unsigned64("random.seed", cfg.seed);
  r.check_unknown();

  if (cfg.data != "heat" && cfg.data != "quasilinear" && cfg.data != "zero") {
    r.fail("problem.data: unknown problem '" + cfg.data + "' (heat, quasilinear, zero)");
  }
  try {
    (void)make_mu(cfg.mu, cfg.mu_params);
  } catch (const std::exception& e) {
    r.fail(std::string("problem.mu: ") + e.what());
  }
  if (cfg.data != "zero" && (cfg.mu != "constant" || !cfg.mu_params.empty())) {
    r.fail("problem.mu: the " + cfg.data + " problem fixes its own coefficient; set problem.mu only with data = zero");
  }
  try {
    cfg.test_time_family = parse_basis_family(family);
    if (cfg.test_time_family == BasisFamily::ContinuousP1) {
      r.fail("mesh.test_time_family: continuous-P1 test functions do not give an inf-sup stable pairing");
    }
  } catch (const std::exception& e) {
    r.fail(std::string("mesh.test_time_family: ") + e.what());
  }
  if (!(cfg.final_time > 0.0)) r.fail("problem.final_time: must be positive");
  if (cfg.time_elements < 1) r.fail("mesh.time_elements: must be at least 1");
  if (cfg.space_elements < 2) r.fail("mesh.space_elements: must be at least 2 (one interior node)");
  if (cfg.test_refinements < 0) r.fail("mesh.test_refinements: must be non-negative");
  if (cfg.levels < 1) r.fail("study.levels: must be at least 1");
  if (cfg.reference_refinements < 1) r.fail("study.reference_refinements: must be at least 1");
  if (cfg.sigma_hat_S && !(*cfg.sigma_hat_S > 0.0 && *cfg.sigma_hat_S < 1.0)) {
    r.fail("solver.sigma_hat_S: must lie in (0, 1)");
  }
  if (!(cfg.tol > 0.0)) r.fail("solver.tol: must be positive");
  if (cfg.max_outer < 1) r.fail("solver.max_outer: must be at least 1");
  if (cfg.L_practical && *cfg.L_practical < 1) r.fail("solver.L: must be at least 1");
  if (!(cfg.reference_tol > 0.0)) r.fail("solver.reference_tol: must be positive");
  if (!(cfg.rho > 0.0)) r.fail("quality.rho: must be positive");
  if (cfg.max_levels < 0) r.fail("quality.max_levels: must be non-negative");
  if (cfg.surrogate_refinements < 1) r.fail("quality.surrogate_refinements: must be at least 1");
  if (cfg.precond_first_level < 0 || cfg.precond_last_level < cfg.precond_first_level) {
    r.fail("precond.first_level/last_level: need 0 <= first_level <= last_level");
  }
  if (cfg.precision < 1 || cfg.precision > 17) r.fail("output.precision: must lie in 1..17");

  if (!r.problems().empty()) throw ConfigError(r.problems());
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file " + path.string()});
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

ProblemSpec make_problem(const ExperimentConfig& cfg) {
  ProblemSpec spec;
  if (cfg.data == "heat") {
    spec = heat_problem();
  } else if (cfg.data == "quasilinear") {
    spec = quasilinear_problem();
  } else {
    spec = zero_problem(make_mu(cfg.mu, cfg.mu_params));
  }
  spec.final_time = cfg.final_time;
  return spec;
}

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = {"solve",  "convergence", "uzawa-trace", "infsup",
                                                 "pjotr", "precond",     "constants"};
  return names;
}

int run_subcommand(const std::string& name, const ExperimentConfig& cfg, std::ostream& log, std::ostream& err) {
  try {
    if (name == "constants") return run_constants(cfg, log);
    if (name == "solve") return run_solve(cfg, log);
    if (name == "convergence") return run_convergence(cfg, log);
    if (name == "uzawa-trace") return run_uzawa(cfg, log);
    if (name == "infsup") return run_infsup(cfg, log);
    if (name == "pjotr") return run_pjotr(cfg, log);
    if (name == "precond") return run_precond(cfg, log);
    err << "unknown subcommand '" << name << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "configuration rejected: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConvergenceError& e) {
    err << "no convergence: " << e.what() << '\n';
    return kExitNoConvergence;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}

Real measured_rate(const std::vector<Real>& errors) {
  const auto n = static_cast<Real>(errors.size());
  if (errors.size() < 2) return std::numeric_limits<Real>::quiet_NaN();
  Real sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    const Real x = static_cast<Real>(k) * std::log(2.0);
    const Real y = -std::log(errors[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace stm
