#include <doctest.h>

#include "oracles.hpp"
#include "stm/random.hpp"
#include "stm/riesz.hpp"

using namespace stm;

namespace {

TensorSpacePair pair_of(int nt, int nx) { return default_pair(Mesh1D::uniform(0.0, 1.0, nt), Mesh1D::uniform(0.0, 1.0, nx)); }

}  // namespace

TEST_CASE("X gram matrix equals the dense formula") {
  const RieszContext ctx(pair_of(2, 3));
  const TensorSpacePair& p = ctx.pair();
  const DenseMatrix b(p.deriv_t);
  const DenseMatrix mty(p.mass_t_test);
  const DenseMatrix mx(p.mass_x_trial);
  const DenseMatrix ax(p.stiff_x_trial);
  const DenseMatrix expected = oracle::dense_kron(DenseMatrix(p.mass_t_trial), ax) +
                               oracle::dense_kron(p.trace_end * p.trace_end.transpose(), mx) +
                               oracle::dense_kron(b.transpose() * mty.inverse() * b, mx * ax.inverse() * mx);
  CHECK((DenseMatrix(ctx.rx_gram()) - expected).norm() < 1e-12 * expected.norm());
}

TEST_CASE("dual norms are norms of the Riesz representers") {
  const RieszContext ctx(pair_of(3, 4));
  SplitMix64 rng(8);
  const Vector v = rng.uniform_vector(ctx.test_dim());
  CHECK(dual_norm_Y(ctx, ctx.apply_RY(v)) == doctest::Approx(norm_Y(ctx, v)).epsilon(1e-12));
  const Vector u = rng.uniform_vector(ctx.trial_dim());
  CHECK(dual_norm_X(ctx, ctx.apply_RX(u)) == doctest::Approx(norm_X(ctx, u)).epsilon(1e-12));
  CHECK(norm_X_delta(ctx, u) == doctest::Approx(norm_X(ctx, u)).epsilon(1e-12));
  CHECK((riesz_Y_solve(ctx, ctx.apply_RY(v)) - v).norm() < 1e-12 * v.norm() * 10.0);
}

TEST_CASE("inf-sup identity and trace identity") {
  SplitMix64 rng(12);
  for (const int n : {2, 4, 8}) {
    const RieszContext ctx(pair_of(n, n));
    for (int k = 0; k < 5; ++k) {
      const Vector z = rng.uniform_vector(ctx.trial_dim());
      const IdentitySides s = check_infsup_identity(ctx, z);
      CHECK(oracle::rel(s.lhs, s.rhs) < 1e-10);
      const Vector w = rng.uniform_vector(ctx.trial_dim());
      const IdentitySides t = check_trace_identity(ctx, w, z);
      CHECK(std::abs(t.lhs - t.rhs) < 1e-10 * std::max(1.0, std::abs(t.rhs)));
    }
  }
}

TEST_CASE("matrix-free pieces match their dense counterparts") {
  const RieszContext ctx(pair_of(2, 4));
  const TensorSpacePair& p = ctx.pair();
  SplitMix64 rng(13);
  const Vector u = rng.uniform_vector(ctx.trial_dim());
  const Vector l = rng.uniform_vector(ctx.test_dim());
  const DenseMatrix d = oracle::dense_kron(DenseMatrix(p.deriv_t), DenseMatrix(p.mass_x_test_trial));
  CHECK((ctx.apply_dt(u) - d * u).norm() < 1e-13 * (d * u).norm());
  CHECK((ctx.apply_dt_transpose(l) - d.transpose() * l).norm() < 1e-13 * (d.transpose() * l).norm());
  const DenseMatrix g = oracle::dense_kron(p.trace_end * p.trace_end.transpose(), DenseMatrix(p.mass_x_trial));
  CHECK((ctx.apply_trace_T(u) - g * u).norm() < 1e-14 * (1.0 + (g * u).norm()));
}

TEST_CASE("trace embedding constant stays below one and grows with refinement") {
  const Real c4 = estimate_C_J(pair_of(4, 4));
  const Real c8 = estimate_C_J(pair_of(8, 8));
  CHECK(c4 > 0.5);
  CHECK(c8 >= c4);
  CHECK(c8 < 1.05);
}

TEST_CASE("X gram is skipped on request") {
  const RieszContext ctx(pair_of(2, 2), false);
  CHECK_THROWS_AS((void)ctx.solve_X(Vector::Zero(ctx.trial_dim())), std::logic_error);
  CHECK(ctx.solve_Y(Vector::Zero(ctx.test_dim())).norm() == 0.0);
}
