#pragma once

#include <iosfwd>
#include <vector>

#include "stm/riesz.hpp"
#include "stm/spaces.hpp"

namespace stm {

/// Hierarchical piecewise-linear basis on a dyadic mesh of [0, T].
///
/// Level 0 holds the two end hats of the coarsest mesh. A detail function on
/// level l is the level-l hat at an odd node minus half of each neighbouring
/// level-l hat (a full hat when the neighbour is an end point). Columns of
/// `hierarchical` are nodal coefficients; `transform` rescales them to unit
/// L2 norm.
struct TimeWaveletBasis {
  SparseMatrix hierarchical;  // unscaled, wavelet -> nodal
  Vector scaling;             // 1 / ‖ψ‖_{L2} per column
  SparseMatrix transform;     // hierarchical * diag(scaling)
  Vector alphas;              // ‖ψ‖_{H1} of the normalized functions
  Vector level_of;            // level of each column
  int levels = 0;
};

/// Throws std::invalid_argument when the mesh is not a uniform 2^j subdivision.
[[nodiscard]] TimeWaveletBasis build_time_wavelets(const Mesh1D& mesh);

/// ‖ψ‖ mass and mass+stiffness Gram matrices in the wavelet basis.
struct WaveletGrams {
  DenseMatrix mass;
  DenseMatrix h1;
};
[[nodiscard]] WaveletGrams wavelet_grams(const TimeWaveletBasis& basis, const Space1D& time_space);

/// M_t ⊗ A_x + (M_t + A_t) ⊗ M_x A_x⁻¹ M_x on X^δ, applied matrix-free.
class RXOperator {
 public:
  explicit RXOperator(const TensorSpacePair& pair);

  [[nodiscard]] Vector apply(const Vector& v) const;
  [[nodiscard]] Index dim() const { return nt_ * nx_; }

 private:
  SparseMatrix mass_t_;
  SparseMatrix h1_t_;
  SparseMatrix mass_x_;
  SparseMatrix stiff_x_;
  SpdFactorization stiff_x_fact_;
  Index nt_ = 0;
  Index nx_ = 0;
};

[[nodiscard]] RXOperator assemble_RX_operator(const TensorSpacePair& pair);

/// (T ⊗ I) blockdiag[Ǎ_α⁻¹ A_x Ǎ_α⁻¹] (Tᵀ ⊗ I) with Ǎ_α = A_x + α_ψ M_x.
class BlockDiagPrecond {
 public:
  BlockDiagPrecond(TimeWaveletBasis basis, SparseMatrix stiff_x, SparseMatrix mass_x);

  [[nodiscard]] Vector apply(const Vector& h) const;
  [[nodiscard]] Index dim() const { return basis_.transform.rows() * stiff_x_.rows(); }
  [[nodiscard]] const TimeWaveletBasis& basis() const { return basis_; }

 private:
  TimeWaveletBasis basis_;
  SparseMatrix stiff_x_;
  SparseMatrix mass_x_;
  std::vector<SpdFactorization> blocks_;
};

[[nodiscard]] BlockDiagPrecond make_precond(const TensorSpacePair& pair);
[[nodiscard]] Vector apply_precond(const BlockDiagPrecond& p, const Vector& h);

/// With U = A + α² M A⁻¹ M and C = (A + αM) A⁻¹ (A + αM):
/// lower = λ_min(C − U/2), upper = λ_min(2U − C), verbatim_upper = λ_min(U − C).
struct SpectralMargins {
  Real lower = 0.0;
  Real upper = 0.0;
  Real verbatim_upper = 0.0;
  bool verbatim_holds = false;  // verbatim_upper >= -1e-10
};

[[nodiscard]] SpectralMargins check_spectral_inequality(const DenseMatrix& A, const DenseMatrix& M, Real alpha);

struct KappaRow {
  int level = 0;
  Index dim = 0;
  Real kappa = 0.0;
};

/// Time and space meshes of [0, T] x (0, 1) with 2^level elements each.
[[nodiscard]] std::vector<KappaRow> kappa_study(int first_level, int last_level, Real final_time = 1.0);

/// κ of R_X against its exact inverse; should be 1.
[[nodiscard]] Real kappa_control(int level, Real final_time = 1.0);

void write_kappa_csv(std::ostream& os, const std::vector<KappaRow>& rows);

/// |||z|||² = zᵀ R z with R the matrix applied by RXOperator.
[[nodiscard]] Real alternative_norm_sq(const RXOperator& rx, const Vector& z);

struct NormSandwich {
  Real alt_sq = 0.0;       // |||z|||²
  Real x_sq = 0.0;         // ‖z‖²_X on the fine surrogate
  Real x_delta_sq = 0.0;   // ‖z‖²_{X^δ}
  Real upper_factor = 0.0; // 1 / (1 + C_PF⁴)
  Real lower_factor = 0.0; // γ_x² / (1 + C_J²)
};

/// Both sides of the equivalence between |||·||| and the X norms for one z.
/// `fine` must be a finer nested pair and `prolong` the coefficient map into it.
[[nodiscard]] NormSandwich norm_sandwich(const RieszContext& coarse, const RXOperator& rx, const RieszContext& fine,
                                         const SparseMatrix& prolong, const Vector& z, Real gamma_x, Real C_J,
                                         Real C_PF);

}  // namespace stm
