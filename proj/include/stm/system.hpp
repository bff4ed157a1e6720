#pragma once

#include <functional>
#include <limits>
#include <string>

#include "stm/monotone.hpp"
#include "stm/riesz.hpp"
#include "stm/spaces.hpp"

namespace stm {

/// Every constant of the saddle-point analysis for given (L_A, m_A).
struct ConstantsBundle {
  Real L_A = 0.0;
  Real m_A = 0.0;
  Real L_N = 0.0;
  Real L_S = 0.0;
  Real m_S = 0.0;
  Real L_Ninv = 0.0;
  Real L_Beinv = 0.0;
  Real C_1 = 0.0;
  Real C_J = std::numeric_limits<Real>::quiet_NaN();  // filled by estimate_C_J
  Real C_PF = 0.0;                                     // 1/π on (0, 1)
  MonotoneConstants A;                                 // Zarantonello data for A
  MonotoneConstants S;                                 // and for the Schur operator
};

[[nodiscard]] ConstantsBundle derive_constants(Real L_A, Real m_A);
[[nodiscard]] ConstantsBundle derive_constants(const MuCoefficient& mu);

/// A parabolic problem u' + A u = ℓ, u(0) = u₀ on (0, T) × (0, 1).
/// ℓ(v) = ∫∫ load·v + flux·∂_x v; either part may be empty.
struct ProblemSpec {
  std::string name;
  MuCoefficient mu;
  Real final_time = 1.0;
  std::function<Real(Real, Real)> load;
  std::function<Real(Real, Real)> flux;
  std::function<Real(Real)> u0;
  std::function<Real(Real, Real)> exact;  // may be empty
};

/// u = sin(πx) e^{-π² t}, μ ≡ 1, ℓ = 0.
[[nodiscard]] ProblemSpec heat_problem();
/// u = 2 sin(πx) e^{-t}, μ(s) = 1 + 1/(1+s), ℓ := ∂_t u + A u.
[[nodiscard]] ProblemSpec quasilinear_problem();
/// ℓ = 0, u₀ = 0.
[[nodiscard]] ProblemSpec zero_problem(MuCoefficient mu);

/// Moments of ℓ against both tensor spaces and of u₀ against X_x.
struct ProblemData {
  Vector ell_Y;
  Vector ell_X;
  Vector u0_moments;
  Real u0_norm_sq = 0.0;
};

/// ∫∫ load·v + flux·∂_x v for every basis function v of the space (6×6 Gauss per element).
[[nodiscard]] Vector assemble_functional(const ProblemSpec& spec, const TensorSpace& space);
[[nodiscard]] ProblemData assemble_problem(const ProblemSpec& spec, const TensorSpacePair& pair);

struct Rhs {
  Vector f;  // ℓ on Y^δ
  Vector g;  // −ℓ(v) − ⟨u₀, v(0)⟩_H on X^δ
};

[[nodiscard]] Rhs assemble_rhs(const ProblemData& data, const TensorSpacePair& pair);

struct SaddleState {
  Vector lambda;
  Vector u;
};

struct DualPair {
  Vector y;
  Vector x;
};

/// Riesz maps plus the Galerkin operators A_Y^δ and A_X^δ of one pair.
struct Discretization {
  RieszContext ctx;
  GalerkinOperator op_Y;
  GalerkinOperator op_X;

  [[nodiscard]] const TensorSpacePair& pair() const { return ctx.pair(); }
};

[[nodiscard]] Discretization make_discretization(TensorSpacePair pair, const MuCoefficient& mu, int quad_points = 3);

[[nodiscard]] SaddleState zero_state(const Discretization& disc);

/// N^δ(λ, u) = (A_Y λ + d_t u, d_tᵀ λ − A_X u − γ_T'γ_T u).
[[nodiscard]] DualPair apply_N(const SaddleState& state, const Discretization& disc);
/// rhs − N^δ(state).
[[nodiscard]] DualPair residual(const SaddleState& state, const Rhs& rhs, const Discretization& disc);
/// ‖h.y‖_{(Y^δ)'} + ‖h.x‖_{(X^δ)'}
[[nodiscard]] Real product_dual_norm(const DualPair& h, const RieszContext& ctx);
/// ‖λ‖_{Y^δ} + ‖u‖_{X^δ}
[[nodiscard]] Real product_norm(const SaddleState& s, const RieszContext& ctx);

enum class InnerSolver { Zarantonello, Newton };

struct SchurOptions {
  Real inner_tol = -1.0;  // < 0: 1e-10 times the dual norm of the inner right-hand side
  InnerSolver solver = InnerSolver::Zarantonello;
  int max_inner = 100000;
};

struct SchurResult {
  Vector value;    // S^δ z
  Vector lambda;   // (A_Y^δ)⁻¹(f − d_t z)
  int inner_iterations = 0;
};

/// S^δ z = A_X z + γ_T'γ_T z + g − d_tᵀ (A_Y)⁻¹(f − d_t z).
[[nodiscard]] SchurResult apply_S(const Vector& z, const Rhs& rhs, const Discretization& disc,
                                  const ConstantsBundle& bundle, const SchurOptions& options = {});

/// (A_Y^δ)⁻¹ h by Zarantonello iteration or damped Newton.
[[nodiscard]] ZarantonelloResult solve_A_Y(const Vector& h, const Discretization& disc, const ConstantsBundle& bundle,
                                           Real tol, InnerSolver solver, int max_iter, const Vector* start = nullptr);

struct ReferenceSolution {
  SaddleState state;
  Real residual = 0.0;
  int iterations = 0;
};

/// Damped Newton on the full system N^δ(λ, u) = (f, g) until the product dual
/// norm of the residual is ≤ tol·max(1, ‖(f, g)‖). Throws ConvergenceError.
[[nodiscard]] ReferenceSolution solve_reference(const Rhs& rhs, const Discretization& disc, Real tol = 1e-12,
                                                int max_iter = 50);

}  // namespace stm
