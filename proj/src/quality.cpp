#include "stm/quality.hpp"

#include <cmath>

namespace stm {

namespace {

const BasisSpec kContinuous{BasisFamily::ContinuousP1, BoundaryCondition::None};
const BasisSpec kDiscontinuous{BasisFamily::DiscontinuousP1, BoundaryCondition::None};
const BasisSpec kDirichlet{BasisFamily::ContinuousP1, BoundaryCondition::ZeroDirichlet};

// Columns 1..n-1 of the identity: X_t functions vanishing at t = 0, a
// complement of the constants (the kernel of d/dt).
SparseMatrix drop_first_node(Index n) {
  SparseMatrix q(n, n - 1);
  for (Index j = 0; j + 1 < n; ++j) q.insert(j + 1, j) = 1.0;
  q.makeCompressed();
  return q;
}

Real clamp_unit(Real v) { return std::min(v, 1.0); }

}  // namespace

FineReference make_fine_reference(const ProblemSpec& spec, const Mesh1D& time_mesh, const Mesh1D& space_mesh,
                                  int refinements) {
  TensorSpacePair pair = default_pair(uniform_refine(time_mesh, refinements), uniform_refine(space_mesh, refinements));
  Discretization disc = make_discretization(std::move(pair), spec.mu);
  ProblemData data = assemble_problem(spec, disc.pair());
  const Rhs rhs = assemble_rhs(data, disc.pair());
  SaddleState state = solve_reference(rhs, disc).state;
  return FineReference{std::move(disc), std::move(data), std::move(state), refinements};
}

SparseMatrix prolongation(const TensorSpace& coarse, const TensorSpace& fine) {
  const Transfer tt = transfer(coarse.time, fine.time);
  const Transfer tx = transfer(coarse.space, fine.space);
  if (!tt.exact || !tx.exact) throw std::invalid_argument("prolongation: spaces are not nested");
  return kron(tt.matrix, tx.matrix);
}

Real gamma_t(const Space1D& X_t, const Space1D& Y_t) {
  if (X_t.spec() != kContinuous) throw std::invalid_argument("gamma_t: trial basis must be continuous-P1");
  const SparseMatrix mass_y = mixed_matrix(Y_t, Y_t, 0, 0);
  const SparseMatrix deriv = mixed_matrix(Y_t, X_t, 0, 1);
  const SparseMatrix stiff = mixed_matrix(X_t, X_t, 1, 1);
  const SpdFactorization fact(mass_y);
  const DenseMatrix g = DenseMatrix(deriv).transpose() * fact.solve(DenseMatrix(deriv));
  const SparseMatrix a = to_sparse(0.5 * (g + g.transpose()));
  const EigenPair p = extremal_generalized_eigen(a, stiff, Extremal::Smallest, drop_first_node(X_t.dim()));
  return std::sqrt(std::max(p.value, 0.0));
}

Real gamma_x(const Space1D& X_x, int surrogate_refinements) {
  const Space1D fine(uniform_refine(X_x.mesh(), surrogate_refinements), X_x.spec());
  const SparseMatrix mass_c = mixed_matrix(X_x, X_x, 0, 0);
  const SparseMatrix mass_cf = mixed_matrix(X_x, fine, 0, 0);
  const SparseMatrix stiff_c = mixed_matrix(X_x, X_x, 1, 1);
  const SparseMatrix stiff_f = mixed_matrix(fine, fine, 1, 1);
  const DenseMatrix proj = SpdFactorization(mass_c).solve(DenseMatrix(mass_cf));
  const DenseMatrix a = proj.transpose() * DenseMatrix(stiff_c) * proj;
  const EigenPair p = extremal_generalized_eigen(to_sparse(0.5 * (a + a.transpose())), stiff_f, Extremal::Largest);
  return 1.0 / std::sqrt(p.value);
}

Real gamma_direct(const TensorSpacePair& pair, int surrogate_refinements) {
  const TensorSpace& x = pair.trial;
  const Space1D yt_fine(uniform_refine(pair.test.time.mesh(), surrogate_refinements), pair.test.time.spec());
  const Space1D yx_fine(uniform_refine(pair.test.space.mesh(), surrogate_refinements), pair.test.space.spec());
  const RieszContext coarse(pair, false);
  const RieszContext fine(assemble_matrices(x.time, yt_fine, x.space, yx_fine), false);
  const SparseMatrix a = kron(coarse.dt_time_gram(), to_sparse(coarse.dt_space_gram()));
  const SparseMatrix b = kron(fine.dt_time_gram(), to_sparse(fine.dt_space_gram()));
  const SparseMatrix q = kron(drop_first_node(x.time.dim()), sparse_identity(x.space.dim()));
  const EigenPair p = extremal_generalized_eigen(a, b, Extremal::Smallest, q);
  return std::sqrt(std::max(p.value, 0.0));
}

InfSupReport infsup_report(const TensorSpacePair& pair, bool with_direct, int surrogate_refinements) {
  InfSupReport r;
  r.gamma_t = clamp_unit(gamma_t(pair.trial.time, pair.test.time));
  r.gamma_x = gamma_x(pair.trial.space, surrogate_refinements);
  r.gamma_lower = r.gamma_t * r.gamma_x;
  if (with_direct) r.gamma_direct = gamma_direct(pair, surrogate_refinements);
  return r;
}

ApproximationErrors approximation_errors(const FineReference& ref, const TensorSpacePair& coarse, const Vector& u) {
  const SparseMatrix pi = prolongation(coarse.trial, ref.disc.pair().trial);
  const SparseMatrix& g = ref.disc.ctx.rx_gram();
  const Vector& u_ref = ref.state.u;
  ApproximationErrors out;
  const Vector e = u_ref - pi * u;
  out.error = std::sqrt(std::max(e.dot(g * e), 0.0));
  const SparseMatrix gc = SparseMatrix(pi.transpose() * g * pi);
  const SpdFactorization fact(SparseMatrix(0.5 * (gc + SparseMatrix(gc.transpose()))));
  const Vector best = pi * fact.solve(Vector(pi.transpose() * (g * u_ref)));
  const Vector eb = u_ref - best;
  out.best = std::sqrt(std::max(eb.dot(g * eb), 0.0));
  return out;
}

QuasiOptResult quasi_opt_ratio(const FineReference& ref, const TensorSpacePair& coarse, const SaddleState& state,
                               const ConstantsBundle& bundle, const InfSupReport& report) {
  QuasiOptResult out;
  const Real gamma = report.gamma_lower;
  out.bound = 2.0 * (1.0 + bundle.L_Ninv * bundle.L_N / (gamma * gamma));
  const ApproximationErrors errs = approximation_errors(ref, coarse, state.u);
  if (errs.best < 1e-12) {
    out.undefined = true;
    out.ratio = std::numeric_limits<Real>::quiet_NaN();
    return out;
  }
  out.ratio = errs.error / errs.best;
  return out;
}

Real initial_defect(const ProblemData& data, const TensorSpacePair& pair, const Vector& u) {
  const Vector u0 = trace_at_time(pair, u, TimeEnd::Start);
  const Real sq = data.u0_norm_sq - 2.0 * data.u0_moments.dot(u0) + u0.dot(pair.mass_x_trial * u0);
  return std::sqrt(std::max(sq, 0.0));
}

Real lambda_u_gap(const SaddleState& state, const Discretization& disc) {
  return norm_Y(disc.ctx, state.lambda - embed_X_into_Y(state.u, disc.pair()));
}

PjotrReport check_pjotr(const ProblemSpec& spec, const SaddleState& state, const Discretization& disc,
                        const ProblemData& data, const TensorSpacePair& enriched, Real rho,
                        const ConstantsBundle& bundle) {
  const TensorSpacePair& pair = disc.pair();
  if (!pair.x_in_y) throw std::invalid_argument("check_pjotr: X^delta must lie in Y^delta");
  if (enriched.test.dim() <= pair.test.dim()) throw std::invalid_argument("check_pjotr: enriched space is not larger");

  const SpdFactorization mt(enriched.mass_t_test);
  const SpdFactorization ax(enriched.stiff_x_test);
  const Vector h = assemble_functional(spec, enriched.test) -
                   kron_apply(enriched.deriv_t, enriched.mass_x_test_trial, state.u);
  const auto dual = [&](const Vector& r) { return std::sqrt(std::max(r.dot(kron_solve(mt, ax, r)), 0.0)); };

  Vector lambda_hat;
  if (spec.mu.name == "constant") {
    lambda_hat = kron_solve(mt, ax, h) / spec.mu.mu(0.0, 0.0, 0.0);
  } else {
    const GalerkinOperator op(enriched.test, spec.mu);
    const Real tol = 1e-10 * std::max(1.0, dual(h));
    const NewtonResult nr = damped_newton(
        [&op](const Vector& v) { return op.apply(v); }, [&op](const Vector& v) { return op.jacobian(v); }, h,
        Vector::Zero(enriched.test.dim()), tol, 50, dual);
    if (!nr.converged) throw ConvergenceError("check_pjotr: enriched solve did not converge");
    lambda_hat = nr.x;
  }

  const SparseMatrix embed = prolongation(pair.test, enriched.test);
  const Vector diff = lambda_hat - embed * state.lambda;
  PjotrReport r;
  r.rho = rho;
  r.lhs = std::sqrt(std::max(diff.dot(kron_apply(enriched.mass_t_test, enriched.stiff_x_test, diff)), 0.0));
  const Real gap = lambda_u_gap(state, disc);
  const Real defect = initial_defect(data, pair, state.u);
  r.rhs = rho * (gap + std::sqrt(1.0 + bundle.L_A * bundle.L_A) / bundle.m_A * defect);
  r.degenerate = r.rhs < 1e-14;
  r.satisfied = r.lhs <= r.rhs;
  return r;
}

TensorSpacePair enriched_pair(const Mesh1D& time_mesh, const Mesh1D& space_mesh, int level) {
  const Space1D xt(time_mesh, kContinuous);
  const Space1D xx(space_mesh, kDirichlet);
  const Space1D yt(uniform_refine(time_mesh, level), kDiscontinuous);
  const Space1D yx(uniform_refine(space_mesh, level), kDirichlet);
  return assemble_matrices(xt, yt, xx, yx);
}

EnrichmentResult enrich_until_pjotr(const ProblemSpec& spec, const Mesh1D& time_mesh, const Mesh1D& space_mesh,
                                    Real rho, int max_levels, int surrogate_refinements, bool stop_at_first) {
  const ConstantsBundle bundle = derive_constants(spec.mu);
  EnrichmentResult out;
  for (int level = 0; level <= max_levels; ++level) {
    const Discretization disc = make_discretization(enriched_pair(time_mesh, space_mesh, level), spec.mu);
    const ProblemData data = assemble_problem(spec, disc.pair());
    const SaddleState state = solve_reference(assemble_rhs(data, disc.pair()), disc).state;
    const TensorSpacePair surrogate = enriched_pair(time_mesh, space_mesh, level + surrogate_refinements);
    const PjotrReport report = check_pjotr(spec, state, disc, data, surrogate, rho, bundle);
    out.history.push_back(report);
    out.report = report;
    out.state = state;
    if (report.satisfied && out.level < 0) {
      out.level = level;
      if (stop_at_first) break;
    }
  }
  if (out.level >= 0) out.report = out.history[static_cast<std::size_t>(out.level)];
  return out;
}

Real efficiency_lower(const ConstantsBundle& b) { return b.m_A / std::sqrt(1.0 + b.L_A * b.L_A + b.m_A * b.m_A); }

Real reliability_upper(const ConstantsBundle& b, Real rho) {
  const Real t = b.L_A * rho * std::sqrt(1.0 + b.L_A * b.L_A) / b.m_A + 1.0;
  return b.L_Beinv * std::sqrt(b.L_A * b.L_A * rho * rho + t * t);
}

EfficiencyResult efficiency_reliability(const FineReference& ref, const SaddleState& state, const Discretization& disc,
                                        const ProblemData& data, const ConstantsBundle& bundle, Real rho) {
  const Real gap = lambda_u_gap(state, disc);
  const Real defect = initial_defect(data, disc.pair(), state.u);
  const Real denom = std::sqrt(gap * gap + defect * defect);
  if (denom < 1e-14) throw NumericError("efficiency_reliability: estimator vanishes");
  EfficiencyResult out;
  out.ratio = approximation_errors(ref, disc.pair(), state.u).error / denom;
  out.lower = efficiency_lower(bundle);
  out.upper = reliability_upper(bundle, rho);
  return out;
}

ErrorBoundCheck error_bound_check(const FineReference& ref, const SaddleState& state, const Discretization& disc,
                        const ProblemData& data, const ConstantsBundle& bundle) {
  const TensorSpacePair& coarse = disc.pair();
  const TensorSpacePair& fine = ref.disc.pair();
  if (!coarse.x_in_y) throw std::invalid_argument("error_bound_check: X^delta must lie in Y^delta");
  // Fine trial space measured against the coarse test space: the ‖·‖_{X,δ} norm.
  const RieszContext mixed(assemble_matrices(fine.trial.time, coarse.test.time, fine.trial.space, coarse.test.space),
                          false);
  const SparseMatrix pi = prolongation(coarse.trial, fine.trial);
  const Vector e = ref.state.u - pi * state.u;

  ErrorBoundCheck r;
  r.error_X_delta = norm_X_delta(mixed, e);
  r.initial_defect = initial_defect(data, coarse, state.u);
  r.best = approximation_errors(ref, coarse, state.u).best;
  r.bound = bundle.C_1 * r.best;
  r.gap = lambda_u_gap(state, disc);
  r.gap_bound = 2.0 * bundle.C_1 * std::sqrt(1.0 + bundle.L_A * bundle.L_A) / bundle.m_A * r.best;
  return r;
}

}  // namespace stm
