#include "stm/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stm {

Mesh1D::Mesh1D(std::vector<Real> breakpoints) : points_(std::move(breakpoints)) {
  if (points_.size() < 2) throw std::invalid_argument("Mesh1D: need at least two breakpoints");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i] > points_[i - 1])) throw std::invalid_argument("Mesh1D: breakpoints must be strictly increasing");
  }
}

Mesh1D Mesh1D::uniform(Real left, Real right, int elements) {
  if (elements < 1) throw std::invalid_argument("Mesh1D::uniform: need at least one element");
  std::vector<Real> pts(static_cast<std::size_t>(elements) + 1);
  for (int i = 0; i <= elements; ++i) {
    pts[static_cast<std::size_t>(i)] = left + (right - left) * static_cast<Real>(i) / static_cast<Real>(elements);
  }
  pts.back() = right;
  return Mesh1D(std::move(pts));
}

int Mesh1D::locate(Real x) const {
  const auto it = std::upper_bound(points_.begin(), points_.end(), x);
  const auto idx = static_cast<int>(it - points_.begin()) - 1;
  return std::clamp(idx, 0, elements() - 1);
}

Mesh1D uniform_refine(const Mesh1D& mesh) {
  const auto& pts = mesh.breakpoints();
  std::vector<Real> fine;
  fine.reserve(2 * pts.size() - 1);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    fine.push_back(pts[i]);
    fine.push_back(0.5 * (pts[i] + pts[i + 1]));
  }
  fine.push_back(pts.back());
  return Mesh1D(std::move(fine));
}

Mesh1D uniform_refine(const Mesh1D& mesh, int times) {
  Mesh1D out = mesh;
  for (int i = 0; i < times; ++i) out = uniform_refine(out);
  return out;
}

std::string to_string(BasisFamily family) {
  switch (family) {
    case BasisFamily::ContinuousP1: return "continuous-P1";
    case BasisFamily::DiscontinuousP0: return "discontinuous-P0";
    case BasisFamily::DiscontinuousP1: return "discontinuous-P1";
  }
  return "unknown";
}

BasisFamily parse_basis_family(const std::string& name) {
  if (name == "continuous-P1") return BasisFamily::ContinuousP1;
  if (name == "discontinuous-P0") return BasisFamily::DiscontinuousP0;
  if (name == "discontinuous-P1") return BasisFamily::DiscontinuousP1;
  throw std::invalid_argument("unknown basis family '" + name + "'");
}

QuadratureRule QuadratureRule::gauss(int npoints) {
  if (npoints < 1) throw std::invalid_argument("QuadratureRule::gauss: need at least one point");
  QuadratureRule rule;
  rule.order = 2 * npoints - 1;
  rule.points.resize(static_cast<std::size_t>(npoints));
  rule.weights.resize(static_cast<std::size_t>(npoints));
  const int n = npoints;
  for (int i = 0; i < n; ++i) {
    Real x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    Real dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      Real p0 = 1.0;
      Real p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Real pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const Real dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.points[static_cast<std::size_t>(i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

Space1D::Space1D(Mesh1D mesh, BasisSpec spec) : mesh_(std::move(mesh)), spec_(spec) {
  const int n = mesh_.elements();
  switch (spec_.family) {
    case BasisFamily::ContinuousP1:
      dim_ = spec_.boundary == BoundaryCondition::ZeroDirichlet ? n - 1 : n + 1;
      break;
    case BasisFamily::DiscontinuousP0:
      dim_ = n;
      break;
    case BasisFamily::DiscontinuousP1:
      dim_ = 2 * n;
      break;
  }
  if (spec_.boundary == BoundaryCondition::ZeroDirichlet && spec_.family != BasisFamily::ContinuousP1) {
    throw std::invalid_argument("Space1D: zero Dirichlet values need a continuous basis");
  }
  if (dim_ < 1) throw std::invalid_argument("Space1D: space has no degrees of freedom");
}

LocalShape Space1D::local(int element) const {
  LocalShape shape;
  switch (spec_.family) {
    case BasisFamily::ContinuousP1: {
      shape.count = 2;
      const bool dirichlet = spec_.boundary == BoundaryCondition::ZeroDirichlet;
      const int last = mesh_.elements();
      for (int k = 0; k < 2; ++k) {
        const int node = element + k;
        if (dirichlet) {
          shape.dof[static_cast<std::size_t>(k)] = (node == 0 || node == last) ? -1 : node - 1;
        } else {
          shape.dof[static_cast<std::size_t>(k)] = node;
        }
      }
      break;
    }
    case BasisFamily::DiscontinuousP0:
      shape.count = 1;
      shape.dof[0] = element;
      break;
    case BasisFamily::DiscontinuousP1:
      shape.count = 2;
      shape.dof = {2 * static_cast<Index>(element), 2 * static_cast<Index>(element) + 1};
      break;
  }
  return shape;
}

Real Space1D::value(int element, int k, Real x) const {
  if (spec_.family == BasisFamily::DiscontinuousP0) return 1.0;
  const Real a = mesh_.node(element);
  const Real b = mesh_.node(element + 1);
  return k == 0 ? (b - x) / (b - a) : (x - a) / (b - a);
}

Real Space1D::derivative(int element, int k, Real /*x*/) const {
  if (spec_.family == BasisFamily::DiscontinuousP0) return 0.0;
  const Real h = mesh_.width(element);
  return k == 0 ? -1.0 / h : 1.0 / h;
}

Vector Space1D::evaluate_all(Real x, int element) const {
  Vector row = Vector::Zero(dim_);
  const LocalShape shape = local(element);
  for (int k = 0; k < shape.count; ++k) {
    const Index dof = shape.dof[static_cast<std::size_t>(k)];
    if (dof >= 0) row(dof) += value(element, k, x);
  }
  return row;
}

Real Space1D::evaluate(const Vector& coeffs, Real x) const {
  const int e = mesh_.locate(x);
  const LocalShape shape = local(e);
  Real sum = 0.0;
  for (int k = 0; k < shape.count; ++k) {
    const Index dof = shape.dof[static_cast<std::size_t>(k)];
    if (dof >= 0) sum += coeffs(dof) * value(e, k, x);
  }
  return sum;
}

namespace {

std::vector<Real> common_refinement(const Mesh1D& a, const Mesh1D& b) {
  const Real length = a.right() - a.left();
  const Real tol = 1e-13 * length;
  if (std::abs(a.left() - b.left()) > tol || std::abs(a.right() - b.right()) > tol) {
    throw std::invalid_argument("mixed_matrix: meshes cover different intervals");
  }
  std::vector<Real> merged;
  merged.reserve(a.breakpoints().size() + b.breakpoints().size());
  std::merge(a.breakpoints().begin(), a.breakpoints().end(), b.breakpoints().begin(), b.breakpoints().end(),
             std::back_inserter(merged));
  std::vector<Real> out;
  out.reserve(merged.size());
  for (Real p : merged) {
    if (out.empty() || p - out.back() > tol) out.push_back(p);
  }
  return out;
}

}  // namespace

SparseMatrix mixed_matrix(const Space1D& test, const Space1D& trial, int test_deriv, int trial_deriv) {
  const std::vector<Real> pts = common_refinement(test.mesh(), trial.mesh());
  const QuadratureRule rule = QuadratureRule::gauss(3);
  std::vector<Eigen::Triplet<Real>> triplets;
  for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
    const Real a = pts[s];
    const Real b = pts[s + 1];
    const Real mid = 0.5 * (a + b);
    const int et = test.mesh().locate(mid);
    const int es = trial.mesh().locate(mid);
    const LocalShape lt = test.local(et);
    const LocalShape ls = trial.local(es);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Real x = mid + 0.5 * (b - a) * rule.points[q];
      const Real w = 0.5 * (b - a) * rule.weights[q];
      for (int i = 0; i < lt.count; ++i) {
        const Index row = lt.dof[static_cast<std::size_t>(i)];
        if (row < 0) continue;
        const Real vi = test_deriv == 0 ? test.value(et, i, x) : test.derivative(et, i, x);
        for (int j = 0; j < ls.count; ++j) {
          const Index col = ls.dof[static_cast<std::size_t>(j)];
          if (col < 0) continue;
          const Real vj = trial_deriv == 0 ? trial.value(es, j, x) : trial.derivative(es, j, x);
          triplets.emplace_back(row, col, w * vi * vj);
        }
      }
    }
  }
  SparseMatrix out(test.dim(), trial.dim());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return pruned(out, 0.0);
}

Transfer transfer(const Space1D& from, const Space1D& to) {
  const SparseMatrix mass_to = mixed_matrix(to, to, 0, 0);
  const SparseMatrix mass_cross = mixed_matrix(to, from, 0, 0);
  const SparseMatrix mass_from = mixed_matrix(from, from, 0, 0);
  const SpdFactorization fact(mass_to);
  const DenseMatrix coeffs = fact.solve(DenseMatrix(mass_cross));

  Transfer out;
  const DenseMatrix captured = DenseMatrix(mass_cross).transpose() * coeffs;
  for (Index j = 0; j < from.dim(); ++j) {
    const Real norm2 = mass_from.coeff(j, j);
    const Real residual = std::max(norm2 - captured(j, j), 0.0) / norm2;
    out.max_residual = std::max(out.max_residual, residual);
  }
  out.exact = out.max_residual <= 1e-12;
  const Real scale = coeffs.cwiseAbs().maxCoeff();
  out.matrix = pruned(to_sparse(coeffs), 1e-13 * scale);
  return out;
}

TensorSpacePair assemble_matrices(const Space1D& trial_time, const Space1D& test_time, const Space1D& trial_space,
                                  const std::optional<Space1D>& test_space) {
  if (trial_time.spec() != BasisSpec{BasisFamily::ContinuousP1, BoundaryCondition::None}) {
    throw std::invalid_argument("assemble_matrices: the temporal trial basis must be continuous-P1 without boundary");
  }
  if (test_time.spec().boundary != BoundaryCondition::None) {
    throw std::invalid_argument("assemble_matrices: temporal test basis must not carry a boundary condition");
  }
  const Space1D test_x = test_space.value_or(trial_space);
  const BasisSpec h10{BasisFamily::ContinuousP1, BoundaryCondition::ZeroDirichlet};
  if (trial_space.spec() != h10 || test_x.spec() != h10) {
    throw std::invalid_argument("assemble_matrices: spatial bases must be continuous-P1 with zero Dirichlet values");
  }
  if (trial_time.mesh().left() != 0.0) throw std::invalid_argument("assemble_matrices: time interval must start at 0");

  TensorSpacePair pair{.trial = TensorSpace{trial_time, trial_space},
                       .test = TensorSpace{test_time, test_x},
                       .final_time = trial_time.mesh().right()};

  pair.mass_t_trial = mixed_matrix(trial_time, trial_time, 0, 0);
  pair.stiff_t_trial = mixed_matrix(trial_time, trial_time, 1, 1);
  pair.mass_t_test = mixed_matrix(test_time, test_time, 0, 0);
  pair.deriv_t = mixed_matrix(test_time, trial_time, 0, 1);
  pair.trace_start = trial_time.evaluate_all(trial_time.mesh().left(), 0);
  pair.trace_end = trial_time.evaluate_all(trial_time.mesh().right(), trial_time.mesh().elements() - 1);

  pair.mass_x_trial = mixed_matrix(trial_space, trial_space, 0, 0);
  pair.stiff_x_trial = mixed_matrix(trial_space, trial_space, 1, 1);
  pair.mass_x_test = mixed_matrix(test_x, test_x, 0, 0);
  pair.stiff_x_test = mixed_matrix(test_x, test_x, 1, 1);
  pair.mass_x_test_trial = mixed_matrix(test_x, trial_space, 0, 0);

  const Transfer tt = transfer(trial_time, test_time);
  const Transfer tx = transfer(trial_space, test_x);
  pair.x_in_y = tt.exact && tx.exact;
  if (pair.x_in_y) {
    pair.embed_t = tt.matrix;
    pair.embed_x = tx.matrix;
  }
  return pair;
}

TensorSpacePair default_pair(const Mesh1D& time_mesh, const Mesh1D& space_mesh) {
  const Space1D xt(time_mesh, {BasisFamily::ContinuousP1, BoundaryCondition::None});
  const Space1D yt(time_mesh, {BasisFamily::DiscontinuousP1, BoundaryCondition::None});
  const Space1D xx(space_mesh, {BasisFamily::ContinuousP1, BoundaryCondition::ZeroDirichlet});
  return assemble_matrices(xt, yt, xx);
}

Vector trace_at_time(const TensorSpacePair& pair, const Vector& u, TimeEnd end) {
  const Index nt = pair.trial.time.dim();
  const Index nx = pair.trial.space.dim();
  if (u.size() != nt * nx) throw DimensionError("trace_at_time: coefficient vector has the wrong length");
  Eigen::Map<const RowMajorDense> coeffs(u.data(), nt, nx);
  const Vector& weights = end == TimeEnd::Start ? pair.trace_start : pair.trace_end;
  return coeffs.transpose() * weights;
}

Vector embed_X_into_Y(const Vector& u, const TensorSpacePair& pair) {
  if (!pair.x_in_y) throw std::logic_error("embed_X_into_Y: trial space is not contained in the test space");
  return kron_apply(pair.embed_t, pair.embed_x, u);
}

Real evaluate_tensor(const TensorSpace& space, const Vector& coeffs, Real t, Real x) {
  const Vector tv = space.time.evaluate_all(t);
  const Vector xv = space.space.evaluate_all(x);
  Eigen::Map<const RowMajorDense> c(coeffs.data(), space.time.dim(), space.space.dim());
  return tv.dot(c * xv);
}

}  // namespace stm
