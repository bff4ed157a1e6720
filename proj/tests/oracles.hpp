#pragma once

// Closed-form and brute-force references used by the unit and acceptance tests.

#include <cmath>

#include "stm/core_linalg.hpp"
#include "stm/random.hpp"

namespace oracle {

using stm::DenseMatrix;
using stm::Index;
using stm::Real;
using stm::Vector;

// P1 mass and stiffness on a uniform mesh of [a, a + n h]; all n + 1 nodes.
inline DenseMatrix p1_mass(int n, Real h) {
  DenseMatrix m = DenseMatrix::Zero(n + 1, n + 1);
  for (int e = 0; e < n; ++e) {
    m(e, e) += h / 3.0;
    m(e + 1, e + 1) += h / 3.0;
    m(e, e + 1) += h / 6.0;
    m(e + 1, e) += h / 6.0;
  }
  return m;
}

inline DenseMatrix p1_stiff(int n, Real h) {
  DenseMatrix a = DenseMatrix::Zero(n + 1, n + 1);
  for (int e = 0; e < n; ++e) {
    a(e, e) += 1.0 / h;
    a(e + 1, e + 1) += 1.0 / h;
    a(e, e + 1) -= 1.0 / h;
    a(e + 1, e) -= 1.0 / h;
  }
  return a;
}

// Interior block: zero Dirichlet values at both ends.
inline DenseMatrix interior(const DenseMatrix& full) {
  const Index n = full.rows() - 2;
  return full.block(1, 1, n, n);
}

inline DenseMatrix dense_kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

inline DenseMatrix sym(const DenseMatrix& m) { return 0.5 * (m + m.transpose()); }

// Full generalized spectrum through B^{-1/2} A B^{-1/2}.
inline Vector generalized_eigenvalues(const DenseMatrix& a, const DenseMatrix& b) {
  const Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> eig(sym(a), sym(b), Eigen::EigenvaluesOnly);
  return eig.eigenvalues();
}

inline Real min_eig(const DenseMatrix& m) {
  return Eigen::SelfAdjointEigenSolver<DenseMatrix>(sym(m), Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

inline DenseMatrix random_spd(Index n, stm::SplitMix64& rng, Real shift) {
  DenseMatrix g(n, n);
  for (Index j = 0; j < n; ++j) g.col(j) = rng.uniform_vector(n);
  return g * g.transpose() + shift * DenseMatrix::Identity(n, n);
}

inline Real rel(Real a, Real b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace oracle
