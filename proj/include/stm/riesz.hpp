#pragma once

#include <optional>

#include "stm/core_linalg.hpp"
#include "stm/spaces.hpp"

namespace stm {

/// Riesz maps of Y^δ and of X^δ equipped with the mesh-dependent norm
///   ‖z‖²_{X,δ} = ‖z‖²_Y + ‖d_t z‖²_{(Y^δ)'} + ‖z(T)‖²_H.
///
/// R_Y = M_t^Y ⊗ A_x^Y is solved through its two 1D factors. The X Gram
/// matrix M_t^X ⊗ A_x^X + τ_T τ_Tᵀ ⊗ M_x^X + (B_tᵀ (M_t^Y)⁻¹ B_t) ⊗ (M_x^{XY} (A_x^Y)⁻¹ M_x^{YX})
/// is the Schur complement of the linear parabolic 2×2 system; it is assembled
/// and factored once. With factor_X = false only the Y side and the
/// derivative Gram factors are available.
class RieszContext {
 public:
  explicit RieszContext(TensorSpacePair pair, bool factor_X = true);

  [[nodiscard]] const TensorSpacePair& pair() const { return pair_; }
  [[nodiscard]] Index trial_dim() const { return pair_.trial_dim(); }
  [[nodiscard]] Index test_dim() const { return pair_.test_dim(); }

  [[nodiscard]] Vector apply_RY(const Vector& v) const;
  [[nodiscard]] Vector apply_RX(const Vector& u) const;
  /// d_t^δ u as a functional on Y^δ: (B_t ⊗ M_x^{YX}) u.
  [[nodiscard]] Vector apply_dt(const Vector& u) const;
  [[nodiscard]] Vector apply_dt_transpose(const Vector& lambda) const;
  /// (γ_T^δ)'γ_T^δ u = (τ_T τ_Tᵀ ⊗ M_x^X) u.
  [[nodiscard]] Vector apply_trace_T(const Vector& u) const;

  [[nodiscard]] Vector solve_Y(const Vector& h) const;
  [[nodiscard]] Vector solve_X(const Vector& h) const;

  [[nodiscard]] const SparseMatrix& rx_gram() const { return rx_gram_; }
  [[nodiscard]] const SparseMatrix& dt_time_gram() const { return dt_time_; }
  [[nodiscard]] const DenseMatrix& dt_space_gram() const { return dt_space_; }

 private:
  TensorSpacePair pair_;
  SpdFactorization mt_test_;
  SpdFactorization ax_test_;
  SparseMatrix dt_time_;    // B_tᵀ (M_t^Y)⁻¹ B_t
  DenseMatrix dt_space_;    // M_x^{XY} (A_x^Y)⁻¹ M_x^{YX}
  SparseMatrix rx_gram_;
  std::optional<SpdFactorization> rx_fact_;
};

[[nodiscard]] Vector riesz_Y_solve(const RieszContext& ctx, const Vector& h);
[[nodiscard]] Vector riesz_X_solve(const RieszContext& ctx, const Vector& h);

[[nodiscard]] Real norm_Y(const RieszContext& ctx, const Vector& v);
[[nodiscard]] Real dual_norm_Y(const RieszContext& ctx, const Vector& h);
[[nodiscard]] Real norm_X(const RieszContext& ctx, const Vector& u);
[[nodiscard]] Real dual_norm_X(const RieszContext& ctx, const Vector& h);

/// ‖γ_0 z‖_H and ‖γ_T z‖_H.
[[nodiscard]] Real trace_norm(const TensorSpacePair& pair, const Vector& u, TimeEnd end);

/// ‖z‖_{X,δ} evaluated term by term (Y norm, dual norm of d_t z, final trace).
[[nodiscard]] Real norm_X_delta(const RieszContext& ctx, const Vector& z);

struct IdentitySides {
  Real lhs = 0.0;
  Real rhs = 0.0;
};

/// ‖z‖²_{X,δ} against ‖(d_t + R_Y) z‖²_{(Y^δ)'} + ‖z(0)‖²_H. Needs X^δ ⊆ Y^δ.
[[nodiscard]] IdentitySides check_infsup_identity(const RieszContext& ctx, const Vector& z);

/// (d_t w)(v) + (d_t v)(w) + ⟨w(0), v(0)⟩_H against ⟨w(T), v(T)⟩_H for w, v ∈ X^δ ⊆ Y^δ.
[[nodiscard]] IdentitySides check_trace_identity(const RieszContext& ctx, const Vector& w, const Vector& v);

/// sup_{t ∈ {0,T}} sup_w ‖w(t)‖_H / sqrt(‖w‖²_Y + ‖d_t w‖²_{(Y^δ)'}) on the given pair.
[[nodiscard]] Real estimate_C_J(const TensorSpacePair& fine);

}  // namespace stm
