#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "stm/system.hpp"

namespace stm {

struct InnerPlan {
  Real sigma_hat_S = 0.0;
  Real C_3 = 0.0;
  int L = 0;
};

/// (1 + σ_S)/2
[[nodiscard]] Real default_sigma_hat(const ConstantsBundle& bundle);

/// C_3 = (1/σ̂)((σ̂ − σ_S)/θ*_S + 1/m_A) and the smallest L ≥ 1 with
/// σ_A^L (C_3 + 1/m_A) ≤ (σ̂ − σ_S)/θ*_S.
[[nodiscard]] InnerPlan plan_inner_count(const ConstantsBundle& bundle, Real sigma_hat_S);

struct UzawaConfig {
  Real sigma_hat_S = 0.0;
  Real C_3 = 0.0;
  int L = 1;
  Real theta_star_A = 0.0;
  Real theta_star_S = 0.0;
  Real tol = 1e-8;
  int max_outer = 1000;

  /// Parameters from plan_inner_count; sigma_hat_S defaults to (1 + σ_S)/2,
  /// L_practical replaces the planned inner count when given.
  static UzawaConfig theoretical(const ConstantsBundle& bundle, std::optional<Real> sigma_hat_S = std::nullopt,
                                 Real tol = 1e-8, int max_outer = 1000, std::optional<int> L_practical = std::nullopt);
};

/// Row k holds the errors of (λ^(k), u^(k)) and the estimate evaluated on (λ^(k+1), u^(k)).
struct UzawaRow {
  int k = 0;
  Real eta = 0.0;
  Real res_Y = 0.0;
  Real res_X = 0.0;
  Real err_u = std::numeric_limits<Real>::quiet_NaN();
  Real err_lambda = std::numeric_limits<Real>::quiet_NaN();
  int inner_count = 0;
  int riesz_Y_solves = 0;
  int riesz_X_solves = 0;
  int nonlinear_applications = 0;
};

struct UzawaTrace {
  std::vector<UzawaRow> rows;
  bool converged = false;

  void write_csv(std::ostream& os) const;
};

struct UzawaResult {
  SaddleState state;
  UzawaTrace trace;
};

/// Inexact Uzawa: L inner Zarantonello steps for λ warm-started from λ^(k),
/// then one Zarantonello step on the Schur operator for u. Stops once the a
/// posteriori estimate on (λ^(k+1), u^(k)) is ≤ cfg.tol. When a reference is
/// given the trace records the errors in ‖·‖_{Y^δ} and ‖·‖_{X^δ}.
[[nodiscard]] UzawaResult run_inexact_uzawa(const Rhs& rhs, const Discretization& disc, const UzawaConfig& cfg,
                                            const SaddleState& start, const SaddleState* reference = nullptr);

struct Estimate {
  Real eta = 0.0;
  Real res_Y = 0.0;  // ‖r_Y‖_{(Y^δ)'}
  Real res_X = 0.0;  // ‖r_X‖_{(X^δ)'}
  DualPair r;
};

/// η = ‖r_Y‖_{(Y^δ)'} + ‖r_X‖_{(X^δ)'} with (r_Y, r_X) = (f, g) − N^δ(λ, u).
[[nodiscard]] Estimate aposteriori_estimate(const SaddleState& state, const Rhs& rhs, const Discretization& disc);

struct EnvelopeCheck {
  Real C_4 = 0.0;
  int violations = 0;
  int checked = 0;
  Real worst_excess = 0.0;  // max over k of (error − bound), either inequality
};

/// Both a priori inequalities (1/C_3)‖λ^δ − λ^(k)‖ ≤ σ̂^k C_4 and ‖u^δ − u^(k)‖ ≤ σ̂^k C_4 on every row.
[[nodiscard]] EnvelopeCheck check_envelope(const UzawaTrace& trace, const UzawaConfig& cfg, Real slack);

}  // namespace stm
