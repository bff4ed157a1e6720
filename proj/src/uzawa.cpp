#include "stm/uzawa.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace stm {

Real default_sigma_hat(const ConstantsBundle& bundle) { return 0.5 * (1.0 + bundle.S.sigma); }

InnerPlan plan_inner_count(const ConstantsBundle& bundle, Real sigma_hat_S) {
  const Real sigma_S = bundle.S.sigma;
  if (!(sigma_hat_S > sigma_S) || !(sigma_hat_S < 1.0)) {
    throw std::invalid_argument("plan_inner_count: sigma_hat_S must lie in (sigma_S, 1) = (" +
                                std::to_string(sigma_S) + ", 1)");
  }
  InnerPlan plan;
  plan.sigma_hat_S = sigma_hat_S;
  const Real gap = (sigma_hat_S - sigma_S) / bundle.S.theta_star;
  plan.C_3 = (gap + 1.0 / bundle.m_A) / sigma_hat_S;
  const Real sigma_A = bundle.A.sigma;
  const Real lhs0 = plan.C_3 + 1.0 / bundle.m_A;
  int L = 1;
  Real factor = sigma_A;
  while (factor * lhs0 > gap) {
    ++L;
    factor *= sigma_A;
    if (L > 1000000) throw std::runtime_error("plan_inner_count: inner count exceeds 10^6");
  }
  plan.L = L;
  return plan;
}

UzawaConfig UzawaConfig::theoretical(const ConstantsBundle& bundle, std::optional<Real> sigma_hat_S, Real tol,
                                     int max_outer, std::optional<int> L_practical) {
  const InnerPlan plan = plan_inner_count(bundle, sigma_hat_S.value_or(default_sigma_hat(bundle)));
  UzawaConfig cfg;
  cfg.sigma_hat_S = plan.sigma_hat_S;
  cfg.C_3 = plan.C_3;
  cfg.L = L_practical.value_or(plan.L);
  cfg.theta_star_A = bundle.A.theta_star;
  cfg.theta_star_S = bundle.S.theta_star;
  cfg.tol = tol;
  cfg.max_outer = max_outer;
  if (cfg.L < 1) throw std::invalid_argument("UzawaConfig: L must be at least 1");
  if (!(tol > 0.0)) throw std::invalid_argument("UzawaConfig: tol must be positive");
  return cfg;
}

Estimate aposteriori_estimate(const SaddleState& state, const Rhs& rhs, const Discretization& disc) {
  Estimate est;
  est.r = residual(state, rhs, disc);
  est.res_Y = dual_norm_Y(disc.ctx, est.r.y);
  est.res_X = dual_norm_X(disc.ctx, est.r.x);
  est.eta = est.res_Y + est.res_X;
  return est;
}

UzawaResult run_inexact_uzawa(const Rhs& rhs, const Discretization& disc, const UzawaConfig& cfg,
                              const SaddleState& start, const SaddleState* reference) {
  const RieszContext& ctx = disc.ctx;
  UzawaResult out;
  Vector lambda = start.lambda;
  Vector u = start.u;

  for (int k = 0; k < cfg.max_outer; ++k) {
    UzawaRow row;
    row.k = k;
    if (reference) {
      row.err_lambda = norm_Y(ctx, reference->lambda - lambda);
      row.err_u = norm_X(ctx, reference->u - u);
    }

    const Vector inner_rhs = rhs.f - ctx.apply_dt(u);
    for (int i = 0; i < cfg.L; ++i) {
      lambda -= cfg.theta_star_A * ctx.solve_Y(disc.op_Y.apply(lambda) - inner_rhs);
    }
    row.inner_count = cfg.L;

    // Residual of (λ^(k+1), u^(k)); its X part drives the outer step.
    const Vector a_u = disc.op_X.apply(u);
    const Vector r_Y = rhs.f - disc.op_Y.apply(lambda) - ctx.apply_dt(u);
    const Vector r_X = rhs.g - ctx.apply_dt_transpose(lambda) + a_u + ctx.apply_trace_T(u);
    const Vector z_Y = ctx.solve_Y(r_Y);
    const Vector z_X = ctx.solve_X(r_X);
    row.res_Y = std::sqrt(std::max(r_Y.dot(z_Y), 0.0));
    row.res_X = std::sqrt(std::max(r_X.dot(z_X), 0.0));
    row.eta = row.res_Y + row.res_X;
    row.riesz_Y_solves = cfg.L + 1;
    row.riesz_X_solves = 1;
    row.nonlinear_applications = cfg.L + 2;
    out.trace.rows.push_back(row);

    if (row.eta <= cfg.tol) {
      out.trace.converged = true;
      break;
    }
    u -= cfg.theta_star_S * z_X;
  }
  out.state = {lambda, u};
  return out;
}

void UzawaTrace::write_csv(std::ostream& os) const {
  os << "k,eta,res_Y,res_X,err_u,err_lambda,inner_count,riesz_Y_solves,riesz_X_solves,nonlinear_applications\n";
  os << std::setprecision(17);
  for (const UzawaRow& r : rows) {
    os << r.k << ',' << r.eta << ',' << r.res_Y << ',' << r.res_X << ',' << r.err_u << ',' << r.err_lambda << ','
       << r.inner_count << ',' << r.riesz_Y_solves << ',' << r.riesz_X_solves << ',' << r.nonlinear_applications
       << '\n';
  }
}

EnvelopeCheck check_envelope(const UzawaTrace& trace, const UzawaConfig& cfg, Real slack) {
  EnvelopeCheck check;
  if (trace.rows.empty()) return check;
  const UzawaRow& first = trace.rows.front();
  if (std::isnan(first.err_u) || std::isnan(first.err_lambda)) {
    throw std::invalid_argument("check_envelope: trace carries no reference errors");
  }
  check.C_4 = std::max(first.err_lambda / cfg.C_3, first.err_u);
  check.worst_excess = -std::numeric_limits<Real>::infinity();
  Real power = 1.0;
  for (const UzawaRow& r : trace.rows) {
    const Real bound = power * check.C_4;
    const Real excess = std::max(r.err_lambda / cfg.C_3 - bound, r.err_u - bound);
    check.worst_excess = std::max(check.worst_excess, excess);
    if (excess > slack) ++check.violations;
    ++check.checked;
    power *= cfg.sigma_hat_S;
  }
  return check;
}

}  // namespace stm
