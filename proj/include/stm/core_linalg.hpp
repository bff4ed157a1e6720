#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace stm {

using Real = double;
using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using RowMajorDense = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Compressed-row storage; every assembled bilinear form lives in one of these.
template <typename Scalar>
using SparseMatrixT = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;
using SparseMatrix = SparseMatrixT<Real>;

using LinearMap = std::function<Vector(const Vector&)>;

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sparse LDL^T factorization of a symmetric positive definite matrix.
///
/// Construction fails with NumericError when the matrix is not symmetric or a
/// non-positive pivot shows up. The object is read-only afterwards, so solves
/// may run concurrently; copies share the factor.
class SpdFactorization {
 public:
  explicit SpdFactorization(const SparseMatrix& matrix);

  [[nodiscard]] Vector solve(const Vector& rhs) const;
  [[nodiscard]] DenseMatrix solve(const DenseMatrix& rhs) const;

  [[nodiscard]] Index size() const { return matrix_.rows(); }
  [[nodiscard]] const SparseMatrix& matrix() const { return matrix_; }

 private:
  SparseMatrix matrix_;
  std::shared_ptr<const Eigen::SimplicialLDLT<Eigen::SparseMatrix<Real>>> ldlt_;
};

[[nodiscard]] Vector spd_solve(const SpdFactorization& fact, const Vector& rhs);

/// Explicit sparse Kronecker product a ⊗ b.
template <typename Scalar>
[[nodiscard]] SparseMatrixT<Scalar> kron(const SparseMatrixT<Scalar>& a, const SparseMatrixT<Scalar>& b) {
  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (Index i = 0; i < a.outerSize(); ++i) {
    for (typename SparseMatrixT<Scalar>::InnerIterator ia(a, i); ia; ++ia) {
      for (Index k = 0; k < b.outerSize(); ++k) {
        for (typename SparseMatrixT<Scalar>::InnerIterator ib(b, k); ib; ++ib) {
          triplets.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                                ia.value() * ib.value());
        }
      }
    }
  }
  SparseMatrixT<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

/// (time ⊗ space) v without forming the product. v is laid out time-major:
/// entry (i, j) of the coefficient tensor sits at i * space.cols() + j.
template <typename Scalar>
[[nodiscard]] Eigen::Matrix<Scalar, Eigen::Dynamic, 1> kron_apply(const SparseMatrixT<Scalar>& time,
                                                                  const SparseMatrixT<Scalar>& space,
                                                                  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) {
  using Block = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  if (v.size() != time.cols() * space.cols()) {
    throw DimensionError("kron_apply: vector length " + std::to_string(v.size()) + " != " +
                         std::to_string(time.cols()) + " x " + std::to_string(space.cols()));
  }
  Eigen::Map<const Block> coeffs(v.data(), time.cols(), space.cols());
  const Block partial = time * coeffs;
  Block out = (space * partial.transpose()).transpose();
  return Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(out.data(), out.size());
}

template <typename Scalar>
class KroneckerOperator {
 public:
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  KroneckerOperator(SparseMatrixT<Scalar> time, SparseMatrixT<Scalar> space)
      : time_(std::move(time)), space_(std::move(space)) {}

  [[nodiscard]] VectorType apply(const VectorType& v) const { return kron_apply(time_, space_, v); }
  [[nodiscard]] VectorType apply_transpose(const VectorType& v) const {
    return kron_apply<Scalar>(time_.transpose(), space_.transpose(), v);
  }
  [[nodiscard]] SparseMatrixT<Scalar> assemble() const { return kron(time_, space_); }

  [[nodiscard]] Index rows() const { return time_.rows() * space_.rows(); }
  [[nodiscard]] Index cols() const { return time_.cols() * space_.cols(); }
  [[nodiscard]] const SparseMatrixT<Scalar>& time_factor() const { return time_; }
  [[nodiscard]] const SparseMatrixT<Scalar>& space_factor() const { return space_; }

 private:
  SparseMatrixT<Scalar> time_;
  SparseMatrixT<Scalar> space_;
};

template <typename Scalar>
[[nodiscard]] Eigen::Matrix<Scalar, Eigen::Dynamic, 1> kron_apply(const KroneckerOperator<Scalar>& op,
                                                                  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) {
  return op.apply(v);
}

/// Solve (time ⊗ space) x = b for SPD factors using the two 1D factorizations.
[[nodiscard]] Vector kron_solve(const SpdFactorization& time, const SpdFactorization& space, const Vector& rhs);

/// Copy of a dense matrix as sparse, keeping every entry that is not exactly zero.
[[nodiscard]] SparseMatrix to_sparse(const DenseMatrix& dense);

/// Drop entries with |value| <= threshold.
[[nodiscard]] SparseMatrix pruned(const SparseMatrix& matrix, Real threshold);

[[nodiscard]] SparseMatrix sparse_identity(Index n);

// ---------------------------------------------------------------------------
// Extremal eigenvalues

enum class Extremal { Smallest, Largest };

struct LanczosOptions {
  int max_steps = 300;
  int max_restarts = 30;
  Real tolerance = 1e-10;  // residual relative to |eigenvalue|
  std::uint64_t seed = 0x5eed5eedULL;
};

struct EigenPair {
  Real value = 0.0;
  Vector vector;
  Real residual = 0.0;
  int iterations = 0;
};

class EigenConvergenceError : public ConvergenceError {
 public:
  EigenConvergenceError(const std::string& what, EigenPair best)
      : ConvergenceError(what), best_(std::move(best)) {}
  [[nodiscard]] const EigenPair& best() const { return best_; }

 private:
  EigenPair best_;
};

struct SpectrumBounds {
  EigenPair smallest;
  EigenPair largest;
  int iterations = 0;
};

/// Lanczos with full reorthogonalization for an operator that is self-adjoint
/// in the inner product <x, y> = x^T G y. Returns both extremal Ritz pairs.
[[nodiscard]] SpectrumBounds lanczos_extremes(const LinearMap& op, const LinearMap& gram, Index dim,
                                              const LanczosOptions& options = {});

/// Extremal eigenpair of the pencil A x = λ B x. With a constraint basis Q the
/// pencil (Q^T A Q, Q^T B Q) is solved and the eigenvector is mapped back.
[[nodiscard]] EigenPair extremal_generalized_eigen(const SparseMatrix& a, const SparseMatrix& b, Extremal which,
                                                   const std::optional<SparseMatrix>& constraint_basis = std::nullopt,
                                                   const LanczosOptions& options = {});

/// λ_max / λ_min of P^{-1} A given matrix-free applications of A and P^{-1}.
[[nodiscard]] Real condition_number_estimate(const LinearMap& apply_a, const LinearMap& apply_pinv, Index dim,
                                             const LanczosOptions& options = {});

}  // namespace stm
