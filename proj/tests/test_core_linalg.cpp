#include <doctest.h>

#include "oracles.hpp"
#include "stm/core_linalg.hpp"
#include "stm/random.hpp"

using namespace stm;

namespace {

SparseMatrix random_sparse(Index rows, Index cols, SplitMix64& rng) {
  DenseMatrix d(rows, cols);
  for (Index j = 0; j < cols; ++j) d.col(j) = rng.uniform_vector(rows);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (rng.uniform() < 0.4) d(i, j) = 0.0;
    }
  }
  return to_sparse(d);
}

}  // namespace

TEST_CASE("splitmix64 reference stream") {
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xe220a8397b1dcdafULL);
  CHECK(rng.next() == 0x6e789e6aa1b965f4ULL);
  SplitMix64 a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.uniform() == b.uniform());
}

TEST_CASE("kron matches the dense product and kron_apply matches kron") {
  SplitMix64 rng(7);
  const SparseMatrix a = random_sparse(3, 4, rng);
  const SparseMatrix b = random_sparse(5, 2, rng);
  const DenseMatrix expected = oracle::dense_kron(DenseMatrix(a), DenseMatrix(b));
  CHECK((DenseMatrix(kron(a, b)) - expected).norm() <= 1e-14 * expected.norm());
  const Vector v = rng.uniform_vector(8);
  CHECK((kron_apply(a, b, v) - expected * v).norm() <= 1e-13 * (expected * v).norm());
  const KroneckerOperator<Real> op(a, b);
  const Vector w = rng.uniform_vector(15);
  CHECK((op.apply_transpose(w) - expected.transpose() * w).norm() <= 1e-13 * w.norm() * expected.norm());
  CHECK_THROWS_AS((void)kron_apply(a, b, Vector(Vector::Zero(7))), DimensionError);
}

TEST_CASE("spd_solve inverts multiplication") {
  SplitMix64 rng(3);
  for (const Index n : {1, 10, 200}) {
    const DenseMatrix m = oracle::random_spd(n, rng, 1.0);
    const SpdFactorization f(to_sparse(m));
    const Vector x = rng.uniform_vector(n);
    const Vector back = spd_solve(f, m * x);
    CHECK((back - x).norm() <= 1e-12 * x.norm() * 10.0);
  }
  DenseMatrix bad = DenseMatrix::Identity(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(SpdFactorization(to_sparse(bad)), NumericError);
}

TEST_CASE("kron_solve inverts a Kronecker product of SPD factors") {
  SplitMix64 rng(11);
  const DenseMatrix a = oracle::random_spd(4, rng, 0.5);
  const DenseMatrix b = oracle::random_spd(6, rng, 0.5);
  const SpdFactorization fa(to_sparse(a)), fb(to_sparse(b));
  const Vector x = rng.uniform_vector(24);
  const Vector rhs = oracle::dense_kron(a, b) * x;
  CHECK((kron_solve(fa, fb, rhs) - x).norm() <= 1e-10 * x.norm());
}

TEST_CASE("extremal generalized eigenvalues") {
  const SparseMatrix id = sparse_identity(6);
  CHECK(extremal_generalized_eigen(id, id, Extremal::Smallest).value == doctest::Approx(1.0).epsilon(1e-10));
  DenseMatrix d = DenseMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 4.0;
  CHECK(extremal_generalized_eigen(to_sparse(d), sparse_identity(2), Extremal::Smallest).value ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(extremal_generalized_eigen(to_sparse(d), sparse_identity(2), Extremal::Largest).value ==
        doctest::Approx(4.0).epsilon(1e-10));

  SplitMix64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const DenseMatrix a = oracle::random_spd(30, rng, 0.1);
    const DenseMatrix b = oracle::random_spd(30, rng, 1.0);
    const Vector all = oracle::generalized_eigenvalues(a, b);
    const EigenPair lo = extremal_generalized_eigen(to_sparse(a), to_sparse(b), Extremal::Smallest);
    const EigenPair hi = extremal_generalized_eigen(to_sparse(a), to_sparse(b), Extremal::Largest);
    CHECK(oracle::rel(lo.value, all.minCoeff()) < 1e-8);
    CHECK(oracle::rel(hi.value, all.maxCoeff()) < 1e-8);
    const Real rayleigh = lo.vector.dot(a * lo.vector) / lo.vector.dot(b * lo.vector);
    CHECK(oracle::rel(rayleigh, lo.value) < 1e-8);
  }
}

TEST_CASE("constrained pencil uses the given basis") {
  DenseMatrix d = DenseMatrix::Zero(3, 3);
  d.diagonal() << 1.0, 2.0, 5.0;
  DenseMatrix q = DenseMatrix::Zero(3, 2);
  q(1, 0) = 1.0;
  q(2, 1) = 1.0;
  const EigenPair p = extremal_generalized_eigen(to_sparse(d), sparse_identity(3), Extremal::Smallest, to_sparse(q));
  CHECK(p.value == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(p.vector.size() == 3);
}

TEST_CASE("condition number estimate") {
  SplitMix64 rng(9);
  const DenseMatrix a = oracle::random_spd(40, rng, 0.2);
  const Eigen::LLT<DenseMatrix> llt(a);
  const LinearMap apply_a = [&](const Vector& v) -> Vector { return a * v; };
  CHECK(condition_number_estimate(apply_a, [&](const Vector& v) -> Vector { return llt.solve(v); }, 40) ==
        doctest::Approx(1.0).epsilon(1e-8));

  DenseMatrix d = DenseMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 100.0;
  CHECK(condition_number_estimate([&](const Vector& v) -> Vector { return d * v; },
                                  [](const Vector& v) { return v; }, 2) == doctest::Approx(100.0).epsilon(1e-10));

  const DenseMatrix p = oracle::random_spd(40, rng, 1.0);
  const Eigen::LLT<DenseMatrix> pllt(p);
  const Vector all = oracle::generalized_eigenvalues(a, p);
  const Real expected = all.maxCoeff() / all.minCoeff();
  const Real got = condition_number_estimate(apply_a, [&](const Vector& v) -> Vector { return pllt.solve(v); }, 40);
  CHECK(oracle::rel(got, expected) < 0.05);
}
