#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "stm/precond.hpp"
#include "stm/random.hpp"

using namespace stm;

namespace {

TensorSpacePair pair_of(int nt, int nx) { return default_pair(Mesh1D::uniform(0.0, 1.0, nt), Mesh1D::uniform(0.0, 1.0, nx)); }

DenseMatrix dense_rx(const TensorSpacePair& p) {
  const DenseMatrix mx(p.mass_x_trial);
  const DenseMatrix ax(p.stiff_x_trial);
  const DenseMatrix mt(p.mass_t_trial);
  const DenseMatrix at(p.stiff_t_trial);
  return oracle::dense_kron(mt, ax) + oracle::dense_kron(mt + at, mx * ax.inverse() * mx);
}

}  // namespace

TEST_CASE("level 0 wavelets are the two end hats") {
  const TimeWaveletBasis b = build_time_wavelets(Mesh1D::uniform(0.0, 1.0, 1));
  CHECK((DenseMatrix(b.hierarchical) - DenseMatrix::Identity(2, 2)).norm() == 0.0);
  // ‖hat‖²_{L2} = 1/3 and ‖hat'‖² = 1 on one unit element.
  CHECK(b.scaling(0) == doctest::Approx(std::sqrt(3.0)));
  CHECK(b.alphas(0) == doctest::Approx(std::sqrt(1.0 + 3.0)));
  CHECK(b.levels == 0);
}

TEST_CASE("level 1 wavelets evaluated pointwise") {
  const Mesh1D mesh = Mesh1D::uniform(0.0, 2.0, 2);
  const TimeWaveletBasis b = build_time_wavelets(mesh);
  const Space1D s(mesh, BasisSpec{});
  const DenseMatrix h(b.hierarchical);
  const auto coarse_hat = [](Real t, int node) { return node == 0 ? 1.0 - t / 2.0 : t / 2.0; };
  const auto fine_hat = [](Real t) { return std::max(0.0, 1.0 - std::abs(t - 1.0)); };
  const QuadratureRule q = QuadratureRule::gauss(3);
  for (int e = 0; e < 2; ++e) {
    for (const Real xi : q.points) {
      const Real t = e + 0.5 * (1.0 + xi);
      CHECK(s.evaluate(h.col(0), t) == doctest::Approx(coarse_hat(t, 0)));
      CHECK(s.evaluate(h.col(1), t) == doctest::Approx(coarse_hat(t, 1)));
      // Both neighbours of the middle node are end points: full weight on the level-1 end hats.
      const Real left = std::max(0.0, 1.0 - t);
      const Real right = std::max(0.0, t - 1.0);
      CHECK(s.evaluate(h.col(2), t) == doctest::Approx(fine_hat(t) - left - right));
    }
  }
  CHECK(std::abs(DenseMatrix(b.transform).determinant()) > 1e-8);
}

TEST_CASE("normalized wavelet Gram matrices stay well conditioned") {
  std::vector<Real> cm, ch;
  for (int level = 1; level <= 6; ++level) {
    const Mesh1D mesh = Mesh1D::uniform(0.0, 1.0, 1 << level);
    const TimeWaveletBasis b = build_time_wavelets(mesh);
    const WaveletGrams g = wavelet_grams(b, Space1D(mesh, BasisSpec{}));
    CHECK((g.mass.diagonal() - Vector::Ones(g.mass.rows())).norm() < 1e-12);
    CHECK((g.h1.diagonal().cwiseSqrt() - b.alphas).norm() < 1e-10 * b.alphas.norm());
    const Vector d = g.h1.diagonal().cwiseSqrt().cwiseInverse();
    const DenseMatrix scaled = d.asDiagonal() * g.h1 * d.asDiagonal();
    const Eigen::SelfAdjointEigenSolver<DenseMatrix> em(g.mass), eh(scaled);
    cm.push_back(em.eigenvalues().maxCoeff() / em.eigenvalues().minCoeff());
    ch.push_back(eh.eigenvalues().maxCoeff() / eh.eigenvalues().minCoeff());
  }
  for (std::size_t i = 1; i < cm.size(); ++i) {
    CHECK(cm[i] / cm[i - 1] <= 1.2);
    CHECK(ch[i] / ch[i - 1] <= 1.2);
  }
}

TEST_CASE("non-dyadic meshes are rejected") {
  CHECK_THROWS_AS((void)build_time_wavelets(Mesh1D::uniform(0.0, 1.0, 3)), std::invalid_argument);
  CHECK_THROWS_AS((void)build_time_wavelets(Mesh1D({0.0, 0.3, 1.0})), std::invalid_argument);
}

TEST_CASE("matrix-free R_X matches the dense assembly") {
  const TensorSpacePair small = pair_of(2, 2);
  const RXOperator rx(small);
  CHECK(rx.dim() == 3);
  CHECK(rx.apply(Vector::Zero(3)).norm() == 0.0);
  const DenseMatrix dense = dense_rx(small);
  for (Index i = 0; i < 3; ++i) CHECK((rx.apply(Vector::Unit(3, i)) - dense.col(i)).norm() < 1e-13 * dense.norm());

  const RXOperator big(pair_of(4, 8));
  SplitMix64 rng(21);
  const Vector v = rng.uniform_vector(big.dim());
  const Vector w = rng.uniform_vector(big.dim());
  CHECK(std::abs(v.dot(big.apply(w)) - w.dot(big.apply(v))) < 1e-12 * std::abs(v.dot(big.apply(w))) + 1e-12);
}

TEST_CASE("block preconditioner: zero, SPD, single-block limit") {
  const TensorSpacePair p = pair_of(4, 8);
  const BlockDiagPrecond pre = make_precond(p);
  CHECK(apply_precond(pre, Vector::Zero(pre.dim())).norm() == 0.0);
  SplitMix64 rng(22);
  for (int k = 0; k < 20; ++k) {
    const Vector h = rng.uniform_vector(pre.dim());
    CHECK(h.dot(apply_precond(pre, h)) > 0.0);
  }

  // One wavelet with α = 0 and unit transform: the block is A_x⁻¹.
  TimeWaveletBasis single;
  single.hierarchical = sparse_identity(1);
  single.scaling = Vector::Ones(1);
  single.transform = sparse_identity(1);
  single.alphas = Vector::Zero(1);
  const BlockDiagPrecond flat(single, p.stiff_x_trial, p.mass_x_trial);
  const Vector h = rng.uniform_vector(p.stiff_x_trial.rows());
  const Vector expected = DenseMatrix(p.stiff_x_trial).llt().solve(h);
  CHECK((flat.apply(h) - expected).norm() < 1e-12 * expected.norm());
}

TEST_CASE("spectral inequality margins") {
  SplitMix64 rng(23);
  const DenseMatrix a = oracle::random_spd(6, rng, 0.5);
  const DenseMatrix m = oracle::random_spd(6, rng, 0.5);
  const SpectralMargins zero = check_spectral_inequality(a, m, 0.0);
  CHECK(zero.lower >= 0.0);
  CHECK(std::abs(zero.verbatim_upper) < 1e-10 * a.norm());

  const DenseMatrix id = DenseMatrix::Identity(3, 3);
  const SpectralMargins commuting = check_spectral_inequality(id, id, 1.0);
  CHECK(commuting.lower == doctest::Approx(3.0));
  CHECK(commuting.upper == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(commuting.verbatim_upper == doctest::Approx(-2.0));
  CHECK_FALSE(commuting.verbatim_holds);

  const SpectralMargins three = check_spectral_inequality(a, m, 3.0);
  CHECK(three.lower >= -1e-10);
  CHECK(three.upper >= -1e-10);
}

TEST_CASE("kappa against the exact inverse is one") {
  CHECK(kappa_control(2) == doctest::Approx(1.0).epsilon(0.05));
  const std::vector<KappaRow> rows = kappa_study(1, 3);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].kappa >= 1.0);
  CHECK(rows[2].dim == 9 * 7);
}

TEST_CASE("kappa estimate agrees with the dense pencil") {
  const TensorSpacePair p = pair_of(8, 8);
  const RXOperator rx(p);
  const BlockDiagPrecond pre = make_precond(p);
  DenseMatrix pinv(rx.dim(), rx.dim());
  for (Index i = 0; i < rx.dim(); ++i) pinv.col(i) = pre.apply(Vector::Unit(rx.dim(), i));
  const Vector ev = oracle::generalized_eigenvalues(dense_rx(p), oracle::sym(pinv).inverse());
  const Real expected = ev.maxCoeff() / ev.minCoeff();
  const Real got = condition_number_estimate([&](const Vector& v) { return rx.apply(v); },
                                             [&](const Vector& v) { return pre.apply(v); }, rx.dim());
  CHECK(oracle::rel(got, expected) < 0.05);
}
