#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stm/core_linalg.hpp"
#include "stm/spaces.hpp"

namespace stm {

/// Scalar coefficient μ(t, x, s) of the quasi-linear operator
/// (A η)(ξ) = ∫ μ(t, x, |∇η|²) ∇η · ∇ξ dx, with bounds on g(r) = μ(r²) r.
struct MuCoefficient {
  std::string name;
  std::function<Real(Real t, Real x, Real s)> mu;
  std::function<Real(Real t, Real x, Real s)> dmu_ds;
  Real m_mu = 1.0;
  Real M_mu = 1.0;
};

[[nodiscard]] MuCoefficient mu_constant(Real c);
/// μ(s) = 1 + 1/(1+s); m_μ = 7/8 (stationary point at r² = 3), M_μ = 2.
[[nodiscard]] MuCoefficient mu_one_plus_inv();
/// μ(s) = a + b s/(1+s); m_μ = a, M_μ = a + 9b/8.
[[nodiscard]] MuCoefficient mu_bounded_ramp(Real a, Real b);

/// Registry lookup: "constant" (params: c), "one-plus-inv", "bounded-ramp" (params: a, b).
[[nodiscard]] MuCoefficient make_mu(const std::string& name, const std::vector<Real>& params);
[[nodiscard]] const std::vector<std::string>& mu_registry_names();

struct MonotoneConstants {
  Real L = 1.0;
  Real m = 1.0;
  Real theta_star = 1.0;
  Real sigma = 0.0;

  /// Fills theta_star = m/L² and sigma = sqrt(1 - m²/L²).
  static MonotoneConstants from(Real L, Real m);
};

[[nodiscard]] MonotoneConstants constants_from_mu(const MuCoefficient& mu);
[[nodiscard]] MonotoneConstants inverse_constants(const MonotoneConstants& c);

struct MuBounds {
  Real m_hat = 0.0;
  Real M_hat = 0.0;
};

/// Extremal difference quotients of g(r) = μ(r²) r on a uniform grid of [0, r_max].
/// Throws NumericError when g is not strictly increasing.
[[nodiscard]] MuBounds empirical_mu_bounds(const std::function<Real(Real)>& mu_fn, Real r_max, int n);

/// Checks the declared (m_μ, M_μ) against empirical_mu_bounds at t = x = 0.5.
void validate_mu_bounds(const MuCoefficient& mu, Real r_max = 10.0, int n = 100000);

/// Galerkin discretization of A on one tensor space (either X^δ or Y^δ).
class GalerkinOperator {
 public:
  GalerkinOperator(TensorSpace space, MuCoefficient mu, int time_points = 3, int space_points = 3);

  [[nodiscard]] Vector apply(const Vector& w) const;
  /// Gateaux derivative at w, entries ∫ (μ + 2 (∂_x w)² μ') ∂_x φ_j ∂_x φ_i.
  [[nodiscard]] SparseMatrix jacobian(const Vector& w) const;

  [[nodiscard]] Index dim() const { return space_.dim(); }
  [[nodiscard]] const TensorSpace& space() const { return space_; }
  [[nodiscard]] const MuCoefficient& mu() const { return mu_; }

 private:
  template <typename Visitor>
  void for_each_point(const Vector& w, Visitor&& visit) const;

  TensorSpace space_;
  MuCoefficient mu_;
  QuadratureRule time_rule_;
  QuadratureRule space_rule_;
};

struct ZarantonelloResult {
  Vector x;
  int iterations = 0;
  Real step_norm = 0.0;
  bool converged = false;
};

using IterationObserver = std::function<void(int iteration, const Vector& x)>;

/// x ← x − θ* R⁻¹(G x − f) until the step, measured in the norm induced by R,
/// drops below tol. The observer sees x_0, x_1, ...
[[nodiscard]] ZarantonelloResult zarantonello_solve(const LinearMap& apply_G, const LinearMap& riesz_solve,
                                                    const Vector& f, const Vector& x0, const MonotoneConstants& c,
                                                    Real tol, int max_iter, const IterationObserver& observer = {});

struct NewtonResult {
  Vector x;
  int iterations = 0;
  Real residual = 0.0;
  bool converged = false;
};

/// Damped Newton for G x = f with step halving until the residual norm drops.
[[nodiscard]] NewtonResult damped_newton(const LinearMap& apply_G, const std::function<SparseMatrix(const Vector&)>& jacobian,
                                         const Vector& f, const Vector& x0, Real tol, int max_iter,
                                         const std::function<Real(const Vector&)>& residual_norm = {});

}  // namespace stm
