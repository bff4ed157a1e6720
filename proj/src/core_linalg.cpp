#include "stm/core_linalg.hpp"

#include <algorithm>
#include <cmath>

#include "stm/random.hpp"

namespace stm {

SpdFactorization::SpdFactorization(const SparseMatrix& matrix) : matrix_(matrix) {
  if (matrix.rows() != matrix.cols()) {
    throw DimensionError("SpdFactorization: matrix is not square");
  }
  const Eigen::SparseMatrix<Real> col_major = matrix;
  const Real scale = col_major.norm();
  const Eigen::SparseMatrix<Real> transposed = col_major.transpose();
  if ((col_major - transposed).norm() > 1e-12 * std::max(scale, Real{1e-300})) {
    throw NumericError("SpdFactorization: matrix is not symmetric");
  }
  auto ldlt = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<Real>>>(col_major);
  if (ldlt->info() != Eigen::Success) {
    throw NumericError("SpdFactorization: factorization failed (singular matrix)");
  }
  if (matrix.rows() > 0 && ldlt->vectorD().minCoeff() <= 0.0) {
    throw NumericError("SpdFactorization: matrix is not positive definite");
  }
  ldlt_ = std::move(ldlt);
}

Vector SpdFactorization::solve(const Vector& rhs) const {
  if (rhs.size() != size()) throw DimensionError("SpdFactorization::solve: size mismatch");
  return ldlt_->solve(rhs);
}

DenseMatrix SpdFactorization::solve(const DenseMatrix& rhs) const {
  if (rhs.rows() != size()) throw DimensionError("SpdFactorization::solve: size mismatch");
  return ldlt_->solve(rhs);
}

Vector spd_solve(const SpdFactorization& fact, const Vector& rhs) { return fact.solve(rhs); }

Vector kron_solve(const SpdFactorization& time, const SpdFactorization& space, const Vector& rhs) {
  const Index nt = time.size();
  const Index nx = space.size();
  if (rhs.size() != nt * nx) throw DimensionError("kron_solve: size mismatch");
  Eigen::Map<const RowMajorDense> coeffs(rhs.data(), nt, nx);
  const DenseMatrix partial = time.solve(DenseMatrix(coeffs));
  const DenseMatrix solved = space.solve(DenseMatrix(partial.transpose()));
  // solved is nx x nt column-major, i.e. the time-major layout we want.
  return Eigen::Map<const Vector>(solved.data(), solved.size());
}

SparseMatrix to_sparse(const DenseMatrix& dense) {
  std::vector<Eigen::Triplet<Real>> triplets;
  for (Index i = 0; i < dense.rows(); ++i) {
    for (Index j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) triplets.emplace_back(i, j, dense(i, j));
    }
  }
  SparseMatrix out(dense.rows(), dense.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

SparseMatrix pruned(const SparseMatrix& matrix, Real threshold) {
  SparseMatrix out = matrix;
  out.prune([threshold](const Index&, const Index&, const Real& value) { return std::abs(value) > threshold; });
  return out;
}

SparseMatrix sparse_identity(Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

namespace {

struct RitzResult {
  Eigen::VectorXd values;
  DenseMatrix vectors;
};

RitzResult tridiagonal_eigen(const std::vector<Real>& alpha, const std::vector<Real>& beta, Index m) {
  Eigen::VectorXd diag(m);
  Eigen::VectorXd sub(std::max<Index>(m - 1, 0));
  for (Index i = 0; i < m; ++i) diag(i) = alpha[static_cast<std::size_t>(i)];
  for (Index i = 0; i + 1 < m; ++i) sub(i) = beta[static_cast<std::size_t>(i)];
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace

SpectrumBounds lanczos_extremes(const LinearMap& op, const LinearMap& gram, Index dim, const LanczosOptions& options) {
  if (dim <= 0) throw DimensionError("lanczos_extremes: empty operator");
  SplitMix64 rng(options.seed);
  Vector start = rng.uniform_vector(dim);
  const Index max_steps = std::min<Index>(dim, options.max_steps);

  SpectrumBounds best;
  int total_iterations = 0;
  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    DenseMatrix basis(dim, max_steps);
    DenseMatrix gram_basis(dim, max_steps);
    std::vector<Real> alpha;
    std::vector<Real> beta;

    const Real start_norm = std::sqrt(start.dot(gram(start)));
    if (!(start_norm > 0.0)) throw NumericError("lanczos_extremes: degenerate start vector");
    Vector q = start / start_norm;

    Index steps = 0;
    bool invariant = false;
    Real last_beta = 0.0;
    RitzResult ritz;
    bool converged = false;

    for (Index j = 0; j < max_steps; ++j) {
      basis.col(j) = q;
      gram_basis.col(j) = gram(q);
      Vector w = op(q);
      ++total_iterations;
      Real a = 0.0;
      for (int pass = 0; pass < 2; ++pass) {
        const Vector c = gram_basis.leftCols(j + 1).transpose() * w;
        w -= basis.leftCols(j + 1) * c;
        a += c(j);
      }
      alpha.push_back(a);
      const Real b = std::sqrt(std::max(w.dot(gram(w)), 0.0));
      steps = j + 1;
      last_beta = b;

      const Real scale = std::abs(a) + (j > 0 ? beta.back() : 0.0);
      if (b <= 1e-14 * std::max(scale, Real{1e-300})) invariant = true;

      const bool check = invariant || steps == max_steps || steps % 10 == 0 || steps <= 4;
      if (check) {
        ritz = tridiagonal_eigen(alpha, beta, steps);
        const Real lo = ritz.values(0);
        const Real hi = ritz.values(steps - 1);
        const Real spread = std::max(std::abs(lo), std::abs(hi));
        const Real res_lo = b * std::abs(ritz.vectors(steps - 1, 0));
        const Real res_hi = b * std::abs(ritz.vectors(steps - 1, steps - 1));
        const Real floor = 1e-14 * spread;
        converged = invariant || (res_lo <= options.tolerance * std::max(std::abs(lo), floor) &&
                                  res_hi <= options.tolerance * std::max(std::abs(hi), floor));
        if (converged) break;
      }
      if (invariant) break;
      beta.push_back(b);
      q = w / b;
    }

    if (ritz.values.size() != steps) ritz = tridiagonal_eigen(alpha, beta, steps);
    const auto used = basis.leftCols(steps);
    best.smallest.value = ritz.values(0);
    best.smallest.vector = used * ritz.vectors.col(0);
    best.smallest.residual = last_beta * std::abs(ritz.vectors(steps - 1, 0));
    best.largest.value = ritz.values(steps - 1);
    best.largest.vector = used * ritz.vectors.col(steps - 1);
    best.largest.residual = last_beta * std::abs(ritz.vectors(steps - 1, steps - 1));
    best.iterations = total_iterations;
    best.smallest.iterations = total_iterations;
    best.largest.iterations = total_iterations;
    if (converged || invariant) return best;

    start = best.smallest.vector + best.largest.vector;
  }
  throw EigenConvergenceError("lanczos_extremes: no convergence within the restart cap", best.largest);
}

EigenPair extremal_generalized_eigen(const SparseMatrix& a, const SparseMatrix& b, Extremal which,
                                     const std::optional<SparseMatrix>& constraint_basis,
                                     const LanczosOptions& options) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw DimensionError("extremal_generalized_eigen: pencil dimensions differ");
  }
  SparseMatrix a_red = a;
  SparseMatrix b_red = b;
  if (constraint_basis) {
    const SparseMatrix& q = *constraint_basis;
    if (q.rows() != a.rows()) throw DimensionError("extremal_generalized_eigen: constraint basis rows");
    a_red = SparseMatrix(q.transpose() * a * q);
    b_red = SparseMatrix(q.transpose() * b * q);
  }
  const Index n = a_red.rows();
  const SpdFactorization b_fact(b_red);
  const LinearMap b_apply = [&b_red](const Vector& x) -> Vector { return b_red * x; };

  auto lift = [&](EigenPair pair) {
    if (constraint_basis) pair.vector = (*constraint_basis) * pair.vector;
    return pair;
  };

  try {
    if (which == Extremal::Smallest) {
      std::optional<SpdFactorization> a_fact;
      try {
        a_fact.emplace(a_red);
      } catch (const NumericError&) {
        a_fact.reset();
      }
      if (a_fact) {
        // Shift-invert: the largest eigenvalue of A^{-1} B is 1/λ_min.
        const LinearMap op = [&](const Vector& x) -> Vector { return a_fact->solve(Vector(b_red * x)); };
        SpectrumBounds bounds = lanczos_extremes(op, b_apply, n, options);
        EigenPair pair = bounds.largest;
        pair.value = 1.0 / pair.value;
        return lift(pair);
      }
    }
    const LinearMap op = [&](const Vector& x) -> Vector { return b_fact.solve(Vector(a_red * x)); };
    SpectrumBounds bounds = lanczos_extremes(op, b_apply, n, options);
    return lift(which == Extremal::Smallest ? bounds.smallest : bounds.largest);
  } catch (const EigenConvergenceError& err) {
    throw EigenConvergenceError(err.what(), lift(err.best()));
  }
}

Real condition_number_estimate(const LinearMap& apply_a, const LinearMap& apply_pinv, Index dim,
                               const LanczosOptions& options) {
  // P^{-1} A is self-adjoint in the A inner product.
  const LinearMap op = [&](const Vector& x) -> Vector { return apply_pinv(apply_a(x)); };
  const SpectrumBounds bounds = lanczos_extremes(op, apply_a, dim, options);
  if (!(bounds.smallest.value > 0.0)) throw NumericError("condition_number_estimate: operator not positive definite");
  return bounds.largest.value / bounds.smallest.value;
}

}  // namespace stm
