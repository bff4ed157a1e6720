#include "stm/riesz.hpp"

#include <algorithm>
#include <cmath>

namespace stm {

namespace {

SparseMatrix symmetrized(const SparseMatrix& m) { return SparseMatrix(0.5 * (m + SparseMatrix(m.transpose()))); }

SparseMatrix temporal_derivative_gram(const TensorSpacePair& pair, const SpdFactorization& mt_test) {
  const DenseMatrix solved = mt_test.solve(DenseMatrix(pair.deriv_t));
  const DenseMatrix gram = DenseMatrix(pair.deriv_t).transpose() * solved;
  return symmetrized(to_sparse(gram));
}

DenseMatrix spatial_derivative_gram(const TensorSpacePair& pair, const SpdFactorization& ax_test) {
  const DenseMatrix cross(pair.mass_x_test_trial);
  const DenseMatrix gram = cross.transpose() * ax_test.solve(cross);
  return 0.5 * (gram + gram.transpose());
}

SparseMatrix outer(const Vector& a) {
  SparseMatrix out = to_sparse(a * a.transpose());
  return out;
}

// X Gram matrix without the final-trace term.
SparseMatrix energy_gram(const TensorSpacePair& pair, const SparseMatrix& dt_time, const DenseMatrix& dt_space) {
  return SparseMatrix(kron(pair.mass_t_trial, pair.stiff_x_trial) + kron(dt_time, to_sparse(dt_space)));
}

}  // namespace

RieszContext::RieszContext(TensorSpacePair pair, bool factor_X)
    : pair_(std::move(pair)),
      mt_test_(pair_.mass_t_test),
      ax_test_(pair_.stiff_x_test),
      dt_time_(temporal_derivative_gram(pair_, mt_test_)),
      dt_space_(spatial_derivative_gram(pair_, ax_test_)) {
  if (!factor_X) return;
  rx_gram_ = symmetrized(
      SparseMatrix(energy_gram(pair_, dt_time_, dt_space_) + kron(outer(pair_.trace_end), pair_.mass_x_trial)));
  rx_fact_.emplace(rx_gram_);
}

Vector RieszContext::apply_RX(const Vector& u) const {
  if (!rx_fact_) throw std::logic_error("RieszContext::apply_RX: X Gram matrix was not assembled");
  return rx_gram_ * u;
}

Vector RieszContext::apply_RY(const Vector& v) const { return kron_apply(pair_.mass_t_test, pair_.stiff_x_test, v); }

Vector RieszContext::apply_dt(const Vector& u) const { return kron_apply(pair_.deriv_t, pair_.mass_x_test_trial, u); }

Vector RieszContext::apply_dt_transpose(const Vector& lambda) const {
  return kron_apply<Real>(pair_.deriv_t.transpose(), pair_.mass_x_test_trial.transpose(), lambda);
}

Vector RieszContext::apply_trace_T(const Vector& u) const {
  const Vector trace = trace_at_time(pair_, u, TimeEnd::End);
  const Vector lifted = pair_.mass_x_trial * trace;
  Vector out(u.size());
  Eigen::Map<RowMajorDense> block(out.data(), pair_.trial.time.dim(), pair_.trial.space.dim());
  block = pair_.trace_end * lifted.transpose();
  return out;
}

Vector RieszContext::solve_Y(const Vector& h) const { return kron_solve(mt_test_, ax_test_, h); }

Vector RieszContext::solve_X(const Vector& h) const {
  if (!rx_fact_) throw std::logic_error("RieszContext::solve_X: X Gram matrix was not factored");
  return rx_fact_->solve(h);
}

Vector riesz_Y_solve(const RieszContext& ctx, const Vector& h) { return ctx.solve_Y(h); }

Vector riesz_X_solve(const RieszContext& ctx, const Vector& h) { return ctx.solve_X(h); }

Real norm_Y(const RieszContext& ctx, const Vector& v) { return std::sqrt(std::max(v.dot(ctx.apply_RY(v)), 0.0)); }

Real dual_norm_Y(const RieszContext& ctx, const Vector& h) { return std::sqrt(std::max(h.dot(ctx.solve_Y(h)), 0.0)); }

Real norm_X(const RieszContext& ctx, const Vector& u) { return std::sqrt(std::max(u.dot(ctx.apply_RX(u)), 0.0)); }

Real dual_norm_X(const RieszContext& ctx, const Vector& h) { return std::sqrt(std::max(h.dot(ctx.solve_X(h)), 0.0)); }

Real trace_norm(const TensorSpacePair& pair, const Vector& u, TimeEnd end) {
  const Vector tr = trace_at_time(pair, u, end);
  return std::sqrt(std::max(tr.dot(pair.mass_x_trial * tr), 0.0));
}

Real norm_X_delta(const RieszContext& ctx, const Vector& z) {
  const TensorSpacePair& pair = ctx.pair();
  const Real y2 = z.dot(kron_apply(pair.mass_t_trial, pair.stiff_x_trial, z));
  const Real d = dual_norm_Y(ctx, ctx.apply_dt(z));
  const Real t = trace_norm(pair, z, TimeEnd::End);
  return std::sqrt(std::max(y2, 0.0) + d * d + t * t);
}

IdentitySides check_infsup_identity(const RieszContext& ctx, const Vector& z) {
  const TensorSpacePair& pair = ctx.pair();
  const Real lhs = norm_X_delta(ctx, z);
  const Vector h = ctx.apply_dt(z) + ctx.apply_RY(embed_X_into_Y(z, pair));
  const Real d = dual_norm_Y(ctx, h);
  const Real t0 = trace_norm(pair, z, TimeEnd::Start);
  return {lhs * lhs, d * d + t0 * t0};
}

IdentitySides check_trace_identity(const RieszContext& ctx, const Vector& w, const Vector& v) {
  const TensorSpacePair& pair = ctx.pair();
  const Vector ev = embed_X_into_Y(v, pair);
  const Vector ew = embed_X_into_Y(w, pair);
  const Vector w0 = trace_at_time(pair, w, TimeEnd::Start);
  const Vector v0 = trace_at_time(pair, v, TimeEnd::Start);
  const Vector wT = trace_at_time(pair, w, TimeEnd::End);
  const Vector vT = trace_at_time(pair, v, TimeEnd::End);
  const Real lhs = ev.dot(ctx.apply_dt(w)) + ew.dot(ctx.apply_dt(v)) + w0.dot(pair.mass_x_trial * v0);
  const Real rhs = wT.dot(pair.mass_x_trial * vT);
  return {lhs, rhs};
}

Real estimate_C_J(const TensorSpacePair& fine) {
  const SpdFactorization mt_test(fine.mass_t_test);
  const SpdFactorization ax_test(fine.stiff_x_test);
  const SparseMatrix gram =
      symmetrized(energy_gram(fine, temporal_derivative_gram(fine, mt_test), spatial_derivative_gram(fine, ax_test)));
  const SpdFactorization gram_fact(gram);
  const Index nx = fine.trial.space.dim();
  const Eigen::LLT<DenseMatrix> mass_llt{DenseMatrix(fine.mass_x_trial)};
  const DenseMatrix l = mass_llt.matrixL();

  Real best = 0.0;
  for (const Vector* tau : {&fine.trace_start, &fine.trace_end}) {
    const SparseMatrix lift = kron(to_sparse(*tau), sparse_identity(nx));
    const DenseMatrix k = DenseMatrix(lift.transpose()) * gram_fact.solve(DenseMatrix(lift));
    const DenseMatrix reduced = l.transpose() * (0.5 * (k + k.transpose())) * l;
    const Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(reduced, Eigen::EigenvaluesOnly);
    best = std::max(best, eig.eigenvalues().maxCoeff());
  }
  return std::sqrt(best);
}

}  // namespace stm
