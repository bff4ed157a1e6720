#include "stm/monotone.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace stm {

MuCoefficient mu_constant(Real c) {
  if (!(c > 0.0)) throw std::invalid_argument("mu_constant: c must be positive");
  return {"constant", [c](Real, Real, Real) { return c; }, [](Real, Real, Real) { return 0.0; }, c, c};
}

MuCoefficient mu_one_plus_inv() {
  return {"one-plus-inv", [](Real, Real, Real s) { return 1.0 + 1.0 / (1.0 + s); },
          [](Real, Real, Real s) { return -1.0 / ((1.0 + s) * (1.0 + s)); }, 7.0 / 8.0, 2.0};
}

MuCoefficient mu_bounded_ramp(Real a, Real b) {
  if (!(a > 0.0) || b < 0.0) throw std::invalid_argument("mu_bounded_ramp: need a > 0 and b >= 0");
  return {"bounded-ramp", [a, b](Real, Real, Real s) { return a + b * s / (1.0 + s); },
          [b](Real, Real, Real s) { return b / ((1.0 + s) * (1.0 + s)); }, a, a + 9.0 * b / 8.0};
}

const std::vector<std::string>& mu_registry_names() {
  static const std::vector<std::string> names{"constant", "one-plus-inv", "bounded-ramp"};
  return names;
}

MuCoefficient make_mu(const std::string& name, const std::vector<Real>& params) {
  if (name == "constant") {
    return mu_constant(params.empty() ? 1.0 : params[0]);
  }
  if (name == "one-plus-inv") return mu_one_plus_inv();
  if (name == "bounded-ramp") {
    if (params.size() < 2) throw std::invalid_argument("bounded-ramp needs parameters a and b");
    return mu_bounded_ramp(params[0], params[1]);
  }
  throw std::invalid_argument("unknown mu '" + name + "'");
}

MonotoneConstants MonotoneConstants::from(Real L, Real m) {
  if (!(m > 0.0) || !(L >= m)) throw std::invalid_argument("MonotoneConstants: need 0 < m <= L");
  MonotoneConstants c;
  c.L = L;
  c.m = m;
  c.theta_star = m / (L * L);
  c.sigma = std::sqrt(std::max(0.0, 1.0 - (m * m) / (L * L)));
  return c;
}

MonotoneConstants constants_from_mu(const MuCoefficient& mu) { return MonotoneConstants::from(3.0 * mu.M_mu, mu.m_mu); }

MonotoneConstants inverse_constants(const MonotoneConstants& c) {
  return MonotoneConstants::from(1.0 / c.m, c.m / (c.L * c.L));
}

MuBounds empirical_mu_bounds(const std::function<Real(Real)>& mu_fn, Real r_max, int n) {
  if (n < 100) throw std::invalid_argument("empirical_mu_bounds: need n >= 100");
  if (!(r_max > 0.0)) throw std::invalid_argument("empirical_mu_bounds: r_max must be positive");
  const Real h = r_max / n;
  MuBounds out{std::numeric_limits<Real>::infinity(), -std::numeric_limits<Real>::infinity()};
  Real g_prev = 0.0;
  for (int i = 1; i <= n; ++i) {
    const Real r = i * h;
    const Real g = mu_fn(r * r) * r;
    const Real q = (g - g_prev) / h;
    out.m_hat = std::min(out.m_hat, q);
    out.M_hat = std::max(out.M_hat, q);
    g_prev = g;
  }
  if (!(out.m_hat > 0.0)) throw NumericError("empirical_mu_bounds: g(r) = mu(r^2) r is not strictly increasing");
  return out;
}

void validate_mu_bounds(const MuCoefficient& mu, Real r_max, int n) {
  const MuBounds b = empirical_mu_bounds([&mu](Real s) { return mu.mu(0.5, 0.5, s); }, r_max, n);
  const Real slack = 1e-9;
  if (mu.m_mu > b.m_hat * (1.0 + slack) || mu.M_mu < b.M_hat * (1.0 - slack)) {
    throw std::invalid_argument("mu '" + mu.name + "': declared bounds (" + std::to_string(mu.m_mu) + ", " +
                                std::to_string(mu.M_mu) + ") do not enclose the sampled range (" +
                                std::to_string(b.m_hat) + ", " + std::to_string(b.M_hat) + ")");
  }
}

GalerkinOperator::GalerkinOperator(TensorSpace space, MuCoefficient mu, int time_points, int space_points)
    : space_(std::move(space)),
      mu_(std::move(mu)),
      time_rule_(QuadratureRule::gauss(time_points)),
      space_rule_(QuadratureRule::gauss(space_points)) {}

namespace {

struct PointData {
  Real t = 0.0;
  Real x = 0.0;
  Real weight = 0.0;
  Real grad = 0.0;
  std::array<Index, 4> dofs{-1, -1, -1, -1};
  std::array<Real, 4> shape{0.0, 0.0, 0.0, 0.0};  // φ_a(t) ψ_b'(x)
  int count = 0;
};

}  // namespace

template <typename Visitor>
void GalerkinOperator::for_each_point(const Vector& w, Visitor&& visit) const {
  const Space1D& ts = space_.time;
  const Space1D& xs = space_.space;
  const Index nx = xs.dim();
  const auto& tm = ts.mesh();
  const auto& xm = xs.mesh();
  PointData pd;
  for (int et = 0; et < tm.elements(); ++et) {
    const LocalShape lt = ts.local(et);
    const Real t0 = tm.node(et);
    const Real ht = tm.width(et);
    for (std::size_t qt = 0; qt < time_rule_.points.size(); ++qt) {
      pd.t = t0 + 0.5 * ht * (1.0 + time_rule_.points[qt]);
      const Real wt = 0.5 * ht * time_rule_.weights[qt];
      for (int ex = 0; ex < xm.elements(); ++ex) {
        const LocalShape lx = xs.local(ex);
        const Real x0 = xm.node(ex);
        const Real hx = xm.width(ex);
        for (std::size_t qx = 0; qx < space_rule_.points.size(); ++qx) {
          pd.x = x0 + 0.5 * hx * (1.0 + space_rule_.points[qx]);
          pd.weight = wt * 0.5 * hx * space_rule_.weights[qx];
          pd.count = 0;
          pd.grad = 0.0;
          for (int a = 0; a < lt.count; ++a) {
            const Index dt = lt.dof[static_cast<std::size_t>(a)];
            if (dt < 0) continue;
            const Real phi = ts.value(et, a, pd.t);
            for (int b = 0; b < lx.count; ++b) {
              const Index dx = lx.dof[static_cast<std::size_t>(b)];
              if (dx < 0) continue;
              const auto k = static_cast<std::size_t>(pd.count++);
              pd.dofs[k] = dt * nx + dx;
              pd.shape[k] = phi * xs.derivative(ex, b, pd.x);
              pd.grad += w(pd.dofs[k]) * pd.shape[k];
            }
          }
          visit(pd);
        }
      }
    }
  }
}

Vector GalerkinOperator::apply(const Vector& w) const {
  if (w.size() != dim()) throw DimensionError("GalerkinOperator::apply: size mismatch");
  Vector out = Vector::Zero(dim());
  for_each_point(w, [&](const PointData& pd) {
    const Real flux = pd.weight * mu_.mu(pd.t, pd.x, pd.grad * pd.grad) * pd.grad;
    for (int k = 0; k < pd.count; ++k) out(pd.dofs[static_cast<std::size_t>(k)]) += flux * pd.shape[static_cast<std::size_t>(k)];
  });
  return out;
}

SparseMatrix GalerkinOperator::jacobian(const Vector& w) const {
  if (w.size() != dim()) throw DimensionError("GalerkinOperator::jacobian: size mismatch");
  std::vector<Eigen::Triplet<Real>> triplets;
  for_each_point(w, [&](const PointData& pd) {
    const Real s = pd.grad * pd.grad;
    const Real coeff = pd.weight * (mu_.mu(pd.t, pd.x, s) + 2.0 * s * mu_.dmu_ds(pd.t, pd.x, s));
    for (int i = 0; i < pd.count; ++i) {
      for (int j = 0; j < pd.count; ++j) {
        triplets.emplace_back(pd.dofs[static_cast<std::size_t>(i)], pd.dofs[static_cast<std::size_t>(j)],
                              coeff * pd.shape[static_cast<std::size_t>(i)] * pd.shape[static_cast<std::size_t>(j)]);
      }
    }
  });
  SparseMatrix out(dim(), dim());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

ZarantonelloResult zarantonello_solve(const LinearMap& apply_G, const LinearMap& riesz_solve, const Vector& f,
                                      const Vector& x0, const MonotoneConstants& c, Real tol, int max_iter,
                                      const IterationObserver& observer) {
  ZarantonelloResult res;
  res.x = x0;
  if (observer) observer(0, res.x);
  for (int i = 0; i < max_iter; ++i) {
    const Vector r = apply_G(res.x) - f;
    const Vector z = riesz_solve(r);
    res.x -= c.theta_star * z;
    res.iterations = i + 1;
    res.step_norm = c.theta_star * std::sqrt(std::max(r.dot(z), 0.0));
    if (observer) observer(res.iterations, res.x);
    if (res.step_norm <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

NewtonResult damped_newton(const LinearMap& apply_G, const std::function<SparseMatrix(const Vector&)>& jacobian,
                           const Vector& f, const Vector& x0, Real tol, int max_iter,
                           const std::function<Real(const Vector&)>& residual_norm) {
  const auto norm = [&](const Vector& r) { return residual_norm ? residual_norm(r) : r.norm(); };
  NewtonResult res;
  res.x = x0;
  Vector r = f - apply_G(res.x);
  res.residual = norm(r);
  for (int it = 0; it < max_iter && res.residual > tol; ++it) {
    const Eigen::SparseMatrix<Real> j = jacobian(res.x);
    Eigen::SparseLU<Eigen::SparseMatrix<Real>> lu;
    lu.compute(j);
    if (lu.info() != Eigen::Success) throw NumericError("damped_newton: singular Jacobian");
    const Vector step = lu.solve(r);
    Real damping = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 30; ++halving) {
      const Vector trial = res.x + damping * step;
      const Vector r_trial = f - apply_G(trial);
      const Real n_trial = norm(r_trial);
      if (n_trial < res.residual || n_trial <= tol) {
        res.x = trial;
        r = r_trial;
        res.residual = n_trial;
        accepted = true;
        break;
      }
      damping *= 0.5;
    }
    res.iterations = it + 1;
    if (!accepted) break;  // round-off floor
  }
  res.converged = res.residual <= tol;
  return res;
}

}  // namespace stm
