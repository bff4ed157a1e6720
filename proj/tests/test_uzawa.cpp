#include <doctest.h>

#include <cmath>
#include <sstream>

#include "stm/uzawa.hpp"

using namespace stm;

namespace {

Discretization disc_of(const MuCoefficient& mu, int n) {
  return make_discretization(default_pair(Mesh1D::uniform(0.0, 1.0, n), Mesh1D::uniform(0.0, 1.0, n)), mu);
}

}  // namespace

TEST_CASE("inner count plan for the linear heat constants") {
  const ConstantsBundle b = derive_constants(3.0, 1.0);
  const InnerPlan p = plan_inner_count(b, 0.9995);
  const Real gap = (0.9995 - b.S.sigma) / b.S.theta_star;
  CHECK(p.C_3 == doctest::Approx((gap + 1.0) / 0.9995));
  CHECK(p.L == 84);
  CHECK(std::pow(b.A.sigma, p.L) * (p.C_3 + 1.0) <= gap);
  CHECK(std::pow(b.A.sigma, p.L - 1) * (p.C_3 + 1.0) > gap);
  CHECK(plan_inner_count(b, default_sigma_hat(b)).L == 73);
  CHECK_THROWS_AS((void)plan_inner_count(b, 0.5), std::invalid_argument);
  CHECK_THROWS_AS((void)plan_inner_count(b, 1.0), std::invalid_argument);
}

TEST_CASE("zero data stops after one row with eta = 0") {
  const MuCoefficient mu = mu_constant(1.0);
  const Discretization disc = disc_of(mu, 3);
  const Rhs rhs = assemble_rhs(assemble_problem(zero_problem(mu), disc.pair()), disc.pair());
  const UzawaConfig cfg = UzawaConfig::theoretical(derive_constants(mu));
  const UzawaResult res = run_inexact_uzawa(rhs, disc, cfg, zero_state(disc));
  REQUIRE(res.trace.rows.size() == 1);
  CHECK(res.trace.rows[0].eta == 0.0);
  CHECK(res.trace.converged);
}

TEST_CASE("uzawa converges to the reference and the estimate brackets the error") {
  const MuCoefficient mu = mu_one_plus_inv();
  const ConstantsBundle b = derive_constants(mu);
  const Discretization disc = disc_of(mu, 3);
  const Rhs rhs = assemble_rhs(assemble_problem(quasilinear_problem(), disc.pair()), disc.pair());
  const ReferenceSolution ref = solve_reference(rhs, disc);
  const UzawaConfig cfg = UzawaConfig::theoretical(b, std::nullopt, 1e-3, 200000, 20);
  const UzawaResult res = run_inexact_uzawa(rhs, disc, cfg, zero_state(disc), &ref.state);
  CHECK(res.trace.converged);
  const UzawaRow& last = res.trace.rows.back();
  CHECK(last.riesz_Y_solves == 21);
  CHECK(last.nonlinear_applications == 22);
  const Estimate est = aposteriori_estimate(res.state, rhs, disc);
  const Real err = product_norm({ref.state.lambda - res.state.lambda, ref.state.u - res.state.u}, disc.ctx);
  CHECK(err <= b.L_Ninv * est.eta * (1.0 + 1e-9));
  CHECK(err >= est.eta / b.L_N * (1.0 - 1e-9));

  std::ostringstream os;
  res.trace.write_csv(os);
  CHECK(os.str().rfind("k,eta,res_Y,res_X,err_u,err_lambda,inner_count,", 0) == 0);
}

TEST_CASE("envelope check on a synthetic trace") {
  UzawaConfig cfg;
  cfg.C_3 = 2.0;
  cfg.sigma_hat_S = 0.5;
  UzawaTrace t;
  for (int k = 0; k < 4; ++k) {
    UzawaRow r;
    r.k = k;
    r.err_u = std::pow(0.5, k);
    r.err_lambda = 2.0 * std::pow(0.5, k);
    t.rows.push_back(r);
  }
  CHECK(check_envelope(t, cfg, 1e-12).violations == 0);
  t.rows[2].err_u = 0.3;
  const EnvelopeCheck c = check_envelope(t, cfg, 1e-12);
  CHECK(c.violations == 1);
  CHECK(c.worst_excess == doctest::Approx(0.05));
}
