#pragma once

#include <optional>
#include <vector>

#include "stm/system.hpp"

namespace stm {

/// Continuous-level stand-ins: the problem solved on meshes refined
/// `refinements` times in time and space, plus the prolongation from a coarse X^δ.
struct FineReference {
  Discretization disc;
  ProblemData data;
  SaddleState state;
  int refinements = 2;
};

[[nodiscard]] FineReference make_fine_reference(const ProblemSpec& spec, const Mesh1D& time_mesh,
                                                const Mesh1D& space_mesh, int refinements = 2);

/// Coefficients of a coarse X^δ function in the trial space of `fine` (nested meshes).
[[nodiscard]] SparseMatrix prolongation(const TensorSpace& coarse, const TensorSpace& fine);

/// inf over z_t ∈ X_t with ż_t ≠ 0 of ‖ż_t‖_{(Y_t)'} / ‖ż_t‖_{L2}.
[[nodiscard]] Real gamma_t(const Space1D& X_t, const Space1D& Y_t);

/// 1/‖P‖_{V→V} for the H-orthogonal projector P onto X_x; V is represented by
/// X_x refined `surrogate_refinements` times.
[[nodiscard]] Real gamma_x(const Space1D& X_x, int surrogate_refinements = 2);

/// inf over z ∈ X^δ with d_t z ≠ 0 of ‖d_t z‖_{(Y^δ)'} / ‖d_t z‖_{Y'}, where Y'
/// is represented by the test space refined `surrogate_refinements` times.
[[nodiscard]] Real gamma_direct(const TensorSpacePair& pair, int surrogate_refinements = 2);

struct InfSupReport {
  Real gamma_t = 0.0;
  Real gamma_x = 0.0;
  Real gamma_lower = 0.0;
  std::optional<Real> gamma_direct;
};

[[nodiscard]] InfSupReport infsup_report(const TensorSpacePair& pair, bool with_direct = true,
                                         int surrogate_refinements = 2);

/// ‖u_ref − Π u‖_X and ‖u_ref − P u_ref‖_X (P the X-orthogonal projection onto X^δ),
/// both measured in the fine surrogate norm.
struct ApproximationErrors {
  Real error = 0.0;
  Real best = 0.0;
};

[[nodiscard]] ApproximationErrors approximation_errors(const FineReference& ref, const TensorSpacePair& coarse,
                                                       const Vector& u);

struct QuasiOptResult {
  Real ratio = 0.0;
  Real bound = 0.0;
  bool undefined = false;  // best approximation error below 1e-12
};

/// ratio = ‖u − u^δ‖_X / inf ‖u − ū‖_X, bound = 2(1 + L_{N⁻¹} L_N / γ²) with γ = report.gamma_lower.
[[nodiscard]] QuasiOptResult quasi_opt_ratio(const FineReference& ref, const TensorSpacePair& coarse,
                                             const SaddleState& state, const ConstantsBundle& bundle,
                                             const InfSupReport& report);

/// ‖u₀ − u(0)‖_H from the data moments.
[[nodiscard]] Real initial_defect(const ProblemData& data, const TensorSpacePair& pair, const Vector& u);

/// ‖λ^δ − u^δ‖_{Y^δ}
[[nodiscard]] Real lambda_u_gap(const SaddleState& state, const Discretization& disc);

struct PjotrReport {
  Real rho = 1.0;
  Real lhs = 0.0;
  Real rhs = 0.0;
  bool satisfied = false;
  bool degenerate = false;  // rhs below 1e-14: the condition may never hold
  bool surrogate = true;    // lhs uses an enriched test space in place of Y
};

/// λ̂ solves A λ = ℓ − d_t u^δ on the enriched test space; lhs = ‖λ̂ − λ^δ‖_Y and
/// rhs = ϱ(‖λ^δ − u^δ‖_{Y^δ} + sqrt(1 + L_A²)/m_A ‖u₀ − u^δ(0)‖_H).
[[nodiscard]] PjotrReport check_pjotr(const ProblemSpec& spec, const SaddleState& state, const Discretization& disc,
                                      const ProblemData& data, const TensorSpacePair& enriched, Real rho,
                                      const ConstantsBundle& bundle);

struct EnrichmentResult {
  int level = -1;  // first satisfied level, -1 if none
  PjotrReport report;
  std::vector<PjotrReport> history;
  SaddleState state;  // solution on the final test space
};

/// Y^δ_i = test space on the X^δ meshes refined i times, i = 0..max_levels; the
/// saddle problem is re-solved on every level and checked against Y^δ_i refined
/// `surrogate_refinements` more times.
[[nodiscard]] EnrichmentResult enrich_until_pjotr(const ProblemSpec& spec, const Mesh1D& time_mesh,
                                                  const Mesh1D& space_mesh, Real rho, int max_levels,
                                                  int surrogate_refinements = 2, bool stop_at_first = true);

/// Test pair with X^δ on the given meshes and Y^δ on the meshes refined `level` times.
[[nodiscard]] TensorSpacePair enriched_pair(const Mesh1D& time_mesh, const Mesh1D& space_mesh, int level);

struct EfficiencyResult {
  Real ratio = 0.0;
  Real lower = 0.0;
  Real upper = 0.0;
};

[[nodiscard]] Real efficiency_lower(const ConstantsBundle& bundle);
[[nodiscard]] Real reliability_upper(const ConstantsBundle& bundle, Real rho);

/// ‖u − u^δ‖_X / sqrt(‖λ^δ − u^δ‖²_{Y^δ} + ‖u₀ − u^δ(0)‖²_H) against both constants.
[[nodiscard]] EfficiencyResult efficiency_reliability(const FineReference& ref, const SaddleState& state,
                                                      const Discretization& disc, const ProblemData& data,
                                                      const ConstantsBundle& bundle, Real rho);

struct ErrorBoundCheck {
  Real error_X_delta = 0.0;   // ‖u − u^δ‖_{X,δ}
  Real initial_defect = 0.0;  // ‖u₀ − u^δ(0)‖_H
  Real best = 0.0;            // inf ‖u − ū‖_X
  Real bound = 0.0;           // C_1 · best
  Real gap = 0.0;             // ‖λ^δ − u^δ‖_{Y^δ}
  Real gap_bound = 0.0;       // 2 C_1 sqrt(1 + L_A²)/m_A · best
};

[[nodiscard]] ErrorBoundCheck error_bound_check(const FineReference& ref, const SaddleState& state, const Discretization& disc,
                                      const ProblemData& data, const ConstantsBundle& bundle);

}  // namespace stm
