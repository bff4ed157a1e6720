#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "stm/core_linalg.hpp"

namespace stm {

class Mesh1D {
 public:
  /// Breakpoints must be strictly increasing, at least two of them.
  explicit Mesh1D(std::vector<Real> breakpoints);
  static Mesh1D uniform(Real left, Real right, int elements);

  [[nodiscard]] int elements() const { return static_cast<int>(points_.size()) - 1; }
  [[nodiscard]] Real left() const { return points_.front(); }
  [[nodiscard]] Real right() const { return points_.back(); }
  [[nodiscard]] Real node(int i) const { return points_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] Real width(int e) const { return node(e + 1) - node(e); }
  [[nodiscard]] const std::vector<Real>& breakpoints() const { return points_; }

  /// Element containing x; points outside the mesh are clamped to the end elements.
  [[nodiscard]] int locate(Real x) const;

  friend bool operator==(const Mesh1D&, const Mesh1D&) = default;

 private:
  std::vector<Real> points_;
};

/// Bisect every element; the old breakpoints are kept bit-for-bit.
[[nodiscard]] Mesh1D uniform_refine(const Mesh1D& mesh);
[[nodiscard]] Mesh1D uniform_refine(const Mesh1D& mesh, int times);

enum class BasisFamily { ContinuousP1, DiscontinuousP0, DiscontinuousP1 };
enum class BoundaryCondition { None, ZeroDirichlet };

struct BasisSpec {
  BasisFamily family = BasisFamily::ContinuousP1;
  BoundaryCondition boundary = BoundaryCondition::None;

  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

[[nodiscard]] std::string to_string(BasisFamily family);
[[nodiscard]] BasisFamily parse_basis_family(const std::string& name);

/// Gauss–Legendre rule on [-1, 1].
struct QuadratureRule {
  std::vector<Real> points;
  std::vector<Real> weights;
  int order = 0;  // highest polynomial degree integrated exactly

  static QuadratureRule gauss(int npoints);
};

/// Shape functions supported on one element. A dof of -1 marks a function
/// removed by the boundary condition.
struct LocalShape {
  int count = 0;
  std::array<Index, 2> dof{-1, -1};
};

/// Piecewise polynomial space on a 1D mesh.
class Space1D {
 public:
  Space1D(Mesh1D mesh, BasisSpec spec);

  [[nodiscard]] const Mesh1D& mesh() const { return mesh_; }
  [[nodiscard]] const BasisSpec& spec() const { return spec_; }
  [[nodiscard]] Index dim() const { return dim_; }

  [[nodiscard]] LocalShape local(int element) const;
  [[nodiscard]] Real value(int element, int k, Real x) const;
  [[nodiscard]] Real derivative(int element, int k, Real x) const;

  /// Row of basis values at x, evaluated as the one-sided limit from
  /// `element` (use locate() for interior points).
  [[nodiscard]] Vector evaluate_all(Real x, int element) const;
  [[nodiscard]] Vector evaluate_all(Real x) const { return evaluate_all(x, mesh_.locate(x)); }

  /// Coefficients of sum_i c_i φ_i evaluated at x.
  [[nodiscard]] Real evaluate(const Vector& coeffs, Real x) const;

  friend bool operator==(const Space1D& a, const Space1D& b) { return a.mesh_ == b.mesh_ && a.spec_ == b.spec_; }

 private:
  Mesh1D mesh_;
  BasisSpec spec_;
  Index dim_ = 0;
};

/// ∫ D^test_deriv ψ_i · D^trial_deriv φ_j over the common refinement of both meshes.
[[nodiscard]] SparseMatrix mixed_matrix(const Space1D& test, const Space1D& trial, int test_deriv, int trial_deriv);

struct Transfer {
  SparseMatrix matrix;     // coefficients in `to` of every `from` basis function
  Real max_residual = 0;   // worst relative L2 projection residual
  bool exact = false;      // max_residual <= 1e-12
};

/// L2 projection of each basis function of `from` onto `to`.
[[nodiscard]] Transfer transfer(const Space1D& from, const Space1D& to);

struct TensorSpace {
  Space1D time;
  Space1D space;

  [[nodiscard]] Index dim() const { return time.dim() * space.dim(); }
  [[nodiscard]] Index index(Index time_dof, Index space_dof) const { return time_dof * space.dim() + space_dof; }
};

enum class TimeEnd { Start, End };

/// Trial space X = X_t ⊗ X_x and test space Y = Y_t ⊗ Y_x with every matrix
/// the solvers need. Y_x defaults to X_x.
struct TensorSpacePair {
  TensorSpace trial;
  TensorSpace test;
  Real final_time = 1.0;

  // temporal factors
  SparseMatrix mass_t_trial{};   // ∫ φ_i φ_j on X_t
  SparseMatrix stiff_t_trial{};  // ∫ φ_i' φ_j' on X_t
  SparseMatrix mass_t_test{};    // ∫ ψ_i ψ_j on Y_t
  SparseMatrix deriv_t{};        // ∫ φ_j' ψ_i, rows Y_t, cols X_t
  Vector trace_start{};          // X_t basis values at t = 0
  Vector trace_end{};            // X_t basis values at t = T

  // spatial factors
  SparseMatrix mass_x_trial{};
  SparseMatrix stiff_x_trial{};
  SparseMatrix mass_x_test{};
  SparseMatrix stiff_x_test{};
  SparseMatrix mass_x_test_trial{};  // rows Y_x, cols X_x

  bool x_in_y = false;
  SparseMatrix embed_t{};  // X_t coefficients -> Y_t coefficients (only if x_in_y)
  SparseMatrix embed_x{};

  [[nodiscard]] Index trial_dim() const { return trial.dim(); }
  [[nodiscard]] Index test_dim() const { return test.dim(); }
};

[[nodiscard]] TensorSpacePair assemble_matrices(const Space1D& trial_time, const Space1D& test_time,
                                                const Space1D& trial_space,
                                                const std::optional<Space1D>& test_space = std::nullopt);

/// Default pairing: continuous P1 trial in time, discontinuous P1 test in time
/// on the same mesh, continuous P1 with zero Dirichlet values in space.
[[nodiscard]] TensorSpacePair default_pair(const Mesh1D& time_mesh, const Mesh1D& space_mesh);

/// Spatial coefficients of u(t, ·) at t = 0 or t = T.
[[nodiscard]] Vector trace_at_time(const TensorSpacePair& pair, const Vector& u, TimeEnd end);

/// X^δ coefficients as Y^δ coefficients; requires pair.x_in_y.
[[nodiscard]] Vector embed_X_into_Y(const Vector& u, const TensorSpacePair& pair);

/// Σ c_{ij} φ_i(t) ψ_j(x) at a point.
[[nodiscard]] Real evaluate_tensor(const TensorSpace& space, const Vector& coeffs, Real t, Real x);

}  // namespace stm
