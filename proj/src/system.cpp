#include "stm/system.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stm {

ConstantsBundle derive_constants(Real L_A, Real m_A) {
  if (!(m_A > 0.0) || !(L_A >= m_A)) throw std::invalid_argument("derive_constants: need 0 < m_A <= L_A");
  ConstantsBundle b;
  b.L_A = L_A;
  b.m_A = m_A;
  b.L_N = L_A + 1.0;
  b.L_S = std::max({1.0, L_A, 1.0 / m_A});
  b.m_S = std::min({1.0, m_A, m_A / (L_A * L_A)});
  b.L_Beinv = (1.0 / b.m_S) * (1.0 + 1.0 / m_A);
  b.L_Ninv = 1.0 / m_A + std::max(1.0, 1.0 / m_A) * b.L_Beinv;
  b.C_1 = 1.0 + (1.0 / b.m_S) * (1.0 + std::sqrt((1.0 + L_A * L_A) * (1.0 + 1.0 / (m_A * m_A))));
  b.C_PF = 1.0 / std::numbers::pi;
  b.A = MonotoneConstants::from(L_A, m_A);
  b.S = MonotoneConstants::from(b.L_S, b.m_S);
  return b;
}

ConstantsBundle derive_constants(const MuCoefficient& mu) {
  const MonotoneConstants a = constants_from_mu(mu);
  return derive_constants(a.L, a.m);
}

ProblemSpec heat_problem() {
  ProblemSpec p;
  p.name = "heat";
  p.mu = mu_constant(1.0);
  p.u0 = [](Real x) { return std::sin(std::numbers::pi * x); };
  p.exact = [](Real t, Real x) {
    const Real pi = std::numbers::pi;
    return std::sin(pi * x) * std::exp(-pi * pi * t);
  };
  return p;
}

ProblemSpec quasilinear_problem() {
  ProblemSpec p;
  p.name = "quasilinear";
  p.mu = mu_one_plus_inv();
  const auto mu = p.mu.mu;
  const Real pi = std::numbers::pi;
  p.exact = [pi](Real t, Real x) { return 2.0 * std::sin(pi * x) * std::exp(-t); };
  p.load = [pi](Real t, Real x) { return -2.0 * std::sin(pi * x) * std::exp(-t); };
  p.flux = [pi, mu](Real t, Real x) {
    const Real ux = 2.0 * pi * std::cos(pi * x) * std::exp(-t);
    return mu(t, x, ux * ux) * ux;
  };
  p.u0 = [pi](Real x) { return 2.0 * std::sin(pi * x); };
  return p;
}

ProblemSpec zero_problem(MuCoefficient mu) {
  ProblemSpec p;
  p.name = "zero";
  p.mu = std::move(mu);
  return p;
}

Vector assemble_functional(const ProblemSpec& spec, const TensorSpace& space) {
  Vector out = Vector::Zero(space.dim());
  if (!spec.load && !spec.flux) return out;
  const QuadratureRule rule = QuadratureRule::gauss(6);
  const Space1D& ts = space.time;
  const Space1D& xs = space.space;
  for (int et = 0; et < ts.mesh().elements(); ++et) {
    const LocalShape lt = ts.local(et);
    const Real t0 = ts.mesh().node(et);
    const Real ht = ts.mesh().width(et);
    for (int ex = 0; ex < xs.mesh().elements(); ++ex) {
      const LocalShape lx = xs.local(ex);
      const Real x0 = xs.mesh().node(ex);
      const Real hx = xs.mesh().width(ex);
      for (std::size_t qt = 0; qt < rule.points.size(); ++qt) {
        const Real t = t0 + 0.5 * ht * (1.0 + rule.points[qt]);
        for (std::size_t qx = 0; qx < rule.points.size(); ++qx) {
          const Real x = x0 + 0.5 * hx * (1.0 + rule.points[qx]);
          const Real w = 0.25 * ht * hx * rule.weights[qt] * rule.weights[qx];
          const Real load = spec.load ? spec.load(t, x) : 0.0;
          const Real flux = spec.flux ? spec.flux(t, x) : 0.0;
          for (int a = 0; a < lt.count; ++a) {
            const Index dt = lt.dof[static_cast<std::size_t>(a)];
            if (dt < 0) continue;
            const Real phi = ts.value(et, a, t);
            for (int b = 0; b < lx.count; ++b) {
              const Index dx = lx.dof[static_cast<std::size_t>(b)];
              if (dx < 0) continue;
              out(space.index(dt, dx)) +=
                  w * phi * (load * xs.value(ex, b, x) + flux * xs.derivative(ex, b, x));
            }
          }
        }
      }
    }
  }
  return out;
}

ProblemData assemble_problem(const ProblemSpec& spec, const TensorSpacePair& pair) {
  ProblemData data;
  data.ell_Y = assemble_functional(spec, pair.test);
  data.ell_X = assemble_functional(spec, pair.trial);
  const Space1D& xs = pair.trial.space;
  data.u0_moments = Vector::Zero(xs.dim());
  if (!spec.u0) return data;
  const QuadratureRule rule = QuadratureRule::gauss(8);
  for (int e = 0; e < xs.mesh().elements(); ++e) {
    const LocalShape lx = xs.local(e);
    const Real x0 = xs.mesh().node(e);
    const Real h = xs.mesh().width(e);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Real x = x0 + 0.5 * h * (1.0 + rule.points[q]);
      const Real w = 0.5 * h * rule.weights[q];
      const Real v = spec.u0(x);
      data.u0_norm_sq += w * v * v;
      for (int b = 0; b < lx.count; ++b) {
        const Index d = lx.dof[static_cast<std::size_t>(b)];
        if (d >= 0) data.u0_moments(d) += w * v * xs.value(e, b, x);
      }
    }
  }
  return data;
}

Rhs assemble_rhs(const ProblemData& data, const TensorSpacePair& pair) {
  Rhs rhs;
  rhs.f = data.ell_Y;
  rhs.g = -data.ell_X;
  Eigen::Map<RowMajorDense> g(rhs.g.data(), pair.trial.time.dim(), pair.trial.space.dim());
  g -= pair.trace_start * data.u0_moments.transpose();
  return rhs;
}

Discretization make_discretization(TensorSpacePair pair, const MuCoefficient& mu, int quad_points) {
  TensorSpace test = pair.test;
  TensorSpace trial = pair.trial;
  return Discretization{RieszContext(std::move(pair)), GalerkinOperator(std::move(test), mu, quad_points, quad_points),
                        GalerkinOperator(std::move(trial), mu, quad_points, quad_points)};
}

SaddleState zero_state(const Discretization& disc) {
  return {Vector::Zero(disc.ctx.test_dim()), Vector::Zero(disc.ctx.trial_dim())};
}

DualPair apply_N(const SaddleState& state, const Discretization& disc) {
  const RieszContext& ctx = disc.ctx;
  if (state.lambda.size() != ctx.test_dim() || state.u.size() != ctx.trial_dim()) {
    throw DimensionError("apply_N: state does not match the discretization");
  }
  DualPair out;
  out.y = disc.op_Y.apply(state.lambda) + ctx.apply_dt(state.u);
  out.x = ctx.apply_dt_transpose(state.lambda) - disc.op_X.apply(state.u) - ctx.apply_trace_T(state.u);
  return out;
}

DualPair residual(const SaddleState& state, const Rhs& rhs, const Discretization& disc) {
  DualPair n = apply_N(state, disc);
  return {rhs.f - n.y, rhs.g - n.x};
}

Real product_dual_norm(const DualPair& h, const RieszContext& ctx) {
  return dual_norm_Y(ctx, h.y) + dual_norm_X(ctx, h.x);
}

Real product_norm(const SaddleState& s, const RieszContext& ctx) { return norm_Y(ctx, s.lambda) + norm_X(ctx, s.u); }

ZarantonelloResult solve_A_Y(const Vector& h, const Discretization& disc, const ConstantsBundle& bundle, Real tol,
                             InnerSolver solver, int max_iter, const Vector* start) {
  const Vector x0 = start ? *start : Vector::Zero(disc.ctx.test_dim());
  const LinearMap apply = [&disc](const Vector& v) { return disc.op_Y.apply(v); };
  if (solver == InnerSolver::Zarantonello) {
    const LinearMap riesz = [&disc](const Vector& v) { return disc.ctx.solve_Y(v); };
    return zarantonello_solve(apply, riesz, h, x0, bundle.A, tol, max_iter);
  }
  const NewtonResult nr = damped_newton(
      apply, [&disc](const Vector& v) { return disc.op_Y.jacobian(v); }, h, x0, tol, max_iter,
      [&disc](const Vector& r) { return dual_norm_Y(disc.ctx, r); });
  return {nr.x, nr.iterations, nr.residual, nr.converged};
}

SchurResult apply_S(const Vector& z, const Rhs& rhs, const Discretization& disc, const ConstantsBundle& bundle,
                    const SchurOptions& options) {
  const RieszContext& ctx = disc.ctx;
  const Vector h = rhs.f - ctx.apply_dt(z);
  const Real tol = options.inner_tol >= 0.0 ? options.inner_tol : 1e-10 * dual_norm_Y(ctx, h);
  const ZarantonelloResult inner = solve_A_Y(h, disc, bundle, tol, options.solver, options.max_inner);
  if (!inner.converged) throw ConvergenceError("apply_S: inner solve did not reach the tolerance");
  SchurResult out;
  out.lambda = inner.x;
  out.inner_iterations = inner.iterations;
  out.value = disc.op_X.apply(z) + ctx.apply_trace_T(z) + rhs.g - ctx.apply_dt_transpose(out.lambda);
  return out;
}

namespace {

void append_block(std::vector<Eigen::Triplet<Real>>& triplets, const SparseMatrix& m, Index row0, Index col0,
                  Real scale) {
  for (Index i = 0; i < m.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) {
      triplets.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
    }
  }
}

}  // namespace

ReferenceSolution solve_reference(const Rhs& rhs, const Discretization& disc, Real tol, int max_iter) {
  const RieszContext& ctx = disc.ctx;
  const TensorSpacePair& pair = disc.pair();
  const Index ny = ctx.test_dim();
  const Index nx = ctx.trial_dim();
  const SparseMatrix d = kron(pair.deriv_t, pair.mass_x_test_trial);
  const SparseMatrix dT = d.transpose();
  const SparseMatrix gamma = kron(to_sparse(pair.trace_end * pair.trace_end.transpose()), pair.mass_x_trial);

  const auto split = [ny, nx](const Vector& v) {
    return SaddleState{v.head(ny), v.tail(nx)};
  };
  const LinearMap apply = [&](const Vector& v) -> Vector {
    const DualPair n = apply_N(split(v), disc);
    Vector out(ny + nx);
    out << n.y, n.x;
    return out;
  };
  const auto jacobian = [&](const Vector& v) -> SparseMatrix {
    const SaddleState s = split(v);
    std::vector<Eigen::Triplet<Real>> triplets;
    append_block(triplets, disc.op_Y.jacobian(s.lambda), 0, 0, 1.0);
    append_block(triplets, d, 0, ny, 1.0);
    append_block(triplets, dT, ny, 0, 1.0);
    append_block(triplets, disc.op_X.jacobian(s.u), ny, ny, -1.0);
    append_block(triplets, gamma, ny, ny, -1.0);
    SparseMatrix j(ny + nx, ny + nx);
    j.setFromTriplets(triplets.begin(), triplets.end());
    return j;
  };
  const auto norm = [&](const Vector& r) {
    return dual_norm_Y(ctx, Vector(r.head(ny))) + dual_norm_X(ctx, Vector(r.tail(nx)));
  };

  Vector f(ny + nx);
  f << rhs.f, rhs.g;
  const Real target = tol * std::max(1.0, norm(f));
  const NewtonResult nr = damped_newton(apply, jacobian, f, Vector::Zero(ny + nx), target, max_iter, norm);
  if (!nr.converged) {
    throw ConvergenceError("solve_reference: residual " + std::to_string(nr.residual) + " above " +
                           std::to_string(target));
  }
  return {split(nr.x), nr.residual, nr.iterations};
}

}  // namespace stm
