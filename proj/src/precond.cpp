#include "stm/precond.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace stm {

namespace {

int dyadic_level(const Mesh1D& mesh) {
  const int n = mesh.elements();
  int j = 0;
  while ((1 << j) < n) ++j;
  if ((1 << j) != n) throw std::invalid_argument("build_time_wavelets: element count is not a power of two");
  const Real h = (mesh.right() - mesh.left()) / n;
  for (int e = 0; e < n; ++e) {
    if (std::abs(mesh.width(e) - h) > 1e-12 * h) {
      throw std::invalid_argument("build_time_wavelets: mesh is not uniform");
    }
  }
  return j;
}

// Nodal values on the finest mesh of the level-l hat centred at coarse node m.
void add_hat(std::vector<Eigen::Triplet<Real>>& triplets, Index column, int fine_nodes, int step, int m,
             Real weight) {
  const int centre = m * step;
  for (int i = std::max(0, centre - step + 1); i <= std::min(fine_nodes - 1, centre + step - 1); ++i) {
    const Real v = 1.0 - static_cast<Real>(std::abs(i - centre)) / step;
    triplets.emplace_back(i, column, weight * v);
  }
}

SparseMatrix symmetric_part(const SparseMatrix& m) { return SparseMatrix(0.5 * (m + SparseMatrix(m.transpose()))); }

Real min_eigenvalue(const DenseMatrix& m) {
  const Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace

TimeWaveletBasis build_time_wavelets(const Mesh1D& mesh) {
  const int j = dyadic_level(mesh);
  const int n = mesh.elements();
  const int nodes = n + 1;
  std::vector<Eigen::Triplet<Real>> triplets;
  TimeWaveletBasis basis;
  basis.levels = j;
  basis.level_of = Vector::Zero(nodes);

  Index column = 0;
  add_hat(triplets, column++, nodes, n, 0, 1.0);
  add_hat(triplets, column++, nodes, n, 1, 1.0);
  for (int l = 1; l <= j; ++l) {
    const int step = 1 << (j - l);
    const int nl = 1 << l;
    for (int k = 1; k < nl; k += 2) {
      basis.level_of(column) = l;
      add_hat(triplets, column, nodes, step, k, 1.0);
      for (const int nb : {k - 1, k + 1}) {
        add_hat(triplets, column, nodes, step, nb, (nb == 0 || nb == nl) ? -1.0 : -0.5);
      }
      ++column;
    }
  }
  basis.hierarchical.resize(nodes, nodes);
  basis.hierarchical.setFromTriplets(triplets.begin(), triplets.end());
  basis.hierarchical = pruned(basis.hierarchical, 0.0);

  const Space1D space(mesh, BasisSpec{});
  const SparseMatrix mass = mixed_matrix(space, space, 0, 0);
  const SparseMatrix stiff = mixed_matrix(space, space, 1, 1);
  const DenseMatrix h(basis.hierarchical);
  const Vector mass_diag = (h.transpose() * (mass * h)).diagonal();
  const Vector h1_diag = (h.transpose() * ((mass + stiff) * h)).diagonal();
  basis.scaling = mass_diag.cwiseSqrt().cwiseInverse();
  basis.transform = SparseMatrix(basis.hierarchical * basis.scaling.asDiagonal());
  basis.alphas = (h1_diag.cwiseProduct(basis.scaling.cwiseAbs2())).cwiseSqrt();
  return basis;
}

WaveletGrams wavelet_grams(const TimeWaveletBasis& basis, const Space1D& time_space) {
  const DenseMatrix t(basis.transform);
  const SparseMatrix mass = mixed_matrix(time_space, time_space, 0, 0);
  const SparseMatrix stiff = mixed_matrix(time_space, time_space, 1, 1);
  return {t.transpose() * (mass * t), t.transpose() * ((mass + stiff) * t)};
}

RXOperator::RXOperator(const TensorSpacePair& pair)
    : mass_t_(pair.mass_t_trial),
      h1_t_(SparseMatrix(pair.mass_t_trial + pair.stiff_t_trial)),
      mass_x_(pair.mass_x_trial),
      stiff_x_(pair.stiff_x_trial),
      stiff_x_fact_(symmetric_part(pair.stiff_x_trial)),
      nt_(pair.trial.time.dim()),
      nx_(pair.trial.space.dim()) {}

Vector RXOperator::apply(const Vector& v) const {
  if (v.size() != dim()) throw DimensionError("RXOperator::apply: wrong vector length");
  const Eigen::Map<const RowMajorDense> w(v.data(), nt_, nx_);
  const DenseMatrix first = stiff_x_ * DenseMatrix(mass_t_ * w).transpose();
  const DenseMatrix moments = mass_x_ * DenseMatrix(h1_t_ * w).transpose();
  const DenseMatrix second = mass_x_ * stiff_x_fact_.solve(moments);
  RowMajorDense out = (first + second).transpose();
  return Eigen::Map<const Vector>(out.data(), out.size());
}

RXOperator assemble_RX_operator(const TensorSpacePair& pair) { return RXOperator(pair); }

BlockDiagPrecond::BlockDiagPrecond(TimeWaveletBasis basis, SparseMatrix stiff_x, SparseMatrix mass_x)
    : basis_(std::move(basis)), stiff_x_(std::move(stiff_x)), mass_x_(std::move(mass_x)) {
  blocks_.reserve(static_cast<std::size_t>(basis_.alphas.size()));
  for (Index i = 0; i < basis_.alphas.size(); ++i) {
    blocks_.emplace_back(symmetric_part(SparseMatrix(stiff_x_ + basis_.alphas(i) * mass_x_)));
  }
}

Vector BlockDiagPrecond::apply(const Vector& h) const {
  if (h.size() != dim()) throw DimensionError("BlockDiagPrecond::apply: wrong vector length");
  const Index nt = basis_.transform.rows();
  const Index nx = stiff_x_.rows();
  const Eigen::Map<const RowMajorDense> w(h.data(), nt, nx);
  const RowMajorDense coeffs = basis_.transform.transpose() * w;
  RowMajorDense blocks(nt, nx);
  for (Index i = 0; i < nt; ++i) {
    const SpdFactorization& b = blocks_[static_cast<std::size_t>(i)];
    const Vector inner = b.solve(Vector(coeffs.row(i).transpose()));
    blocks.row(i) = b.solve(Vector(stiff_x_ * inner)).transpose();
  }
  RowMajorDense out = basis_.transform * blocks;
  return Eigen::Map<const Vector>(out.data(), out.size());
}

BlockDiagPrecond make_precond(const TensorSpacePair& pair) {
  return BlockDiagPrecond(build_time_wavelets(pair.trial.time.mesh()), pair.stiff_x_trial, pair.mass_x_trial);
}

Vector apply_precond(const BlockDiagPrecond& p, const Vector& h) { return p.apply(h); }

SpectralMargins check_spectral_inequality(const DenseMatrix& A, const DenseMatrix& M, Real alpha) {
  const Eigen::LLT<DenseMatrix> a_llt(A);
  if (a_llt.info() != Eigen::Success) throw NumericError("check_spectral_inequality: A is not positive definite");
  const DenseMatrix upper = A + alpha * alpha * M * a_llt.solve(M);
  const DenseMatrix shifted = A + alpha * M;
  const DenseMatrix middle = shifted * a_llt.solve(shifted);
  SpectralMargins out;
  out.lower = min_eigenvalue(middle - 0.5 * upper);
  out.upper = min_eigenvalue(2.0 * upper - middle);
  out.verbatim_upper = min_eigenvalue(upper - middle);
  out.verbatim_holds = out.verbatim_upper >= -1e-10;
  return out;
}

std::vector<KappaRow> kappa_study(int first_level, int last_level, Real final_time) {
  std::vector<KappaRow> rows;
  for (int level = first_level; level <= last_level; ++level) {
    const int n = 1 << level;
    const TensorSpacePair pair =
        default_pair(Mesh1D::uniform(0.0, final_time, n), Mesh1D::uniform(0.0, 1.0, n));
    const RXOperator rx(pair);
    const BlockDiagPrecond p = make_precond(pair);
    KappaRow row;
    row.level = level;
    row.dim = rx.dim();
    row.kappa = condition_number_estimate([&](const Vector& v) { return rx.apply(v); },
                                          [&](const Vector& v) { return p.apply(v); }, rx.dim());
    rows.push_back(row);
  }
  return rows;
}

Real kappa_control(int level, Real final_time) {
  const int n = 1 << level;
  const TensorSpacePair pair =
      default_pair(Mesh1D::uniform(0.0, final_time, n), Mesh1D::uniform(0.0, 1.0, n));
  const RXOperator rx(pair);
  DenseMatrix dense(rx.dim(), rx.dim());
  for (Index i = 0; i < rx.dim(); ++i) dense.col(i) = rx.apply(Vector::Unit(rx.dim(), i));
  const Eigen::LLT<DenseMatrix> llt(0.5 * (dense + dense.transpose()));
  return condition_number_estimate([&](const Vector& v) { return rx.apply(v); },
                                   [&](const Vector& v) -> Vector { return llt.solve(v); }, rx.dim());
}

void write_kappa_csv(std::ostream& os, const std::vector<KappaRow>& rows) {
  os << "level,dim,kappa\n" << std::setprecision(17);
  for (const KappaRow& r : rows) os << r.level << ',' << r.dim << ',' << r.kappa << '\n';
}

Real alternative_norm_sq(const RXOperator& rx, const Vector& z) { return z.dot(rx.apply(z)); }

NormSandwich norm_sandwich(const RieszContext& coarse, const RXOperator& rx, const RieszContext& fine,
                           const SparseMatrix& prolong, const Vector& z, Real gamma_x, Real C_J, Real C_PF) {
  NormSandwich out;
  out.alt_sq = alternative_norm_sq(rx, z);
  const Real x = norm_X(fine, prolong * z);
  const Real xd = norm_X_delta(coarse, z);
  out.x_sq = x * x;
  out.x_delta_sq = xd * xd;
  out.upper_factor = 1.0 / (1.0 + std::pow(C_PF, 4));
  out.lower_factor = gamma_x * gamma_x / (1.0 + C_J * C_J);
  return out;
}

}  // namespace stm
