#include "phidec/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace phidec {

BlockMatrix::BlockMatrix(Index n, Index d, Matrix flat) : n_(n), d_(d), flat_(std::move(flat)) {
  if (flat_.rows() != n * d || flat_.cols() != n * d)
    throw DimensionError("BlockMatrix: flat matrix is not (n*d) x (n*d)");
}

BlockMatrix partial_transpose(const BlockMatrix& m, TransposeSide side) {
  return {m.outer(), m.inner(), partial_transpose(m.flat(), m.outer(), m.inner(), side)};
}

Matrix hermitize(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) throw DimensionError("hermitize: matrix is not square");
  if (!m.allFinite()) throw Error("hermitize: non-finite entries");
  const double defect = hermitian_defect(m);
  if (defect > rel_tol * std::max(1.0, m.norm())) throw NotHermitianError("matrix is not Hermitian", defect);
  return 0.5 * (m + m.adjoint());
}

EigenDecomposition eigh(const Matrix& m) {
  const Matrix h = hermitize(m);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success) throw Error("eigh: eigensolver failed to converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double min_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const Matrix h = hermitize(m);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

std::pair<double, Vector> min_eigenpair(const Matrix& m) {
  auto e = eigh(m);
  return {e.values(0), e.vectors.col(0)};
}

Matrix psd_project(const Matrix& m) {
  if (m.size() == 0) return m;
  auto e = eigh(m);
  const RealVector clipped = e.values.cwiseMax(0.0);
  Matrix out = e.vectors * clipped.cast<cplx>().asDiagonal() * e.vectors.adjoint();
  return 0.5 * (out + out.adjoint());
}

Matrix null_space(const Matrix& l, double tol) {
  if (!(tol > 0)) throw Error("null_space: tolerance must be positive");
  const Index cols = l.cols();
  if (l.rows() == 0) return Matrix::Identity(cols, cols);
  Eigen::JacobiSVD<Matrix> svd(l, Eigen::ComputeFullV);
  const RealVector& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * smax) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Matrix matrix_unit(Index n, Index i, Index j) {
  Matrix e = Matrix::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

Matrix swap_operator(Index d) {
  Matrix s = Matrix::Zero(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) s(i * d + j, j * d + i) = 1.0;
  return s;
}

Matrix max_entangled(Index d) {
  Matrix w = Matrix::Zero(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) w(i * d + i, j * d + j) = 1.0;
  return w;
}

Matrix random_gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = cplx(re, im) / std::sqrt(2.0);
    }
  return g;
}

Matrix random_hermitian(Index dim, Rng& rng) {
  const Matrix g = random_gaussian(dim, dim, rng);
  return 0.5 * (g + g.adjoint());
}

Matrix random_psd(Index dim, Rng& rng, Index rank) {
  const Matrix g = random_gaussian(dim, rank < 0 ? dim : rank, rng);
  Matrix p = g * g.adjoint();
  return 0.5 * (p + p.adjoint());
}

Matrix random_unitary(Index dim, Rng& rng) {
  const Matrix g = random_gaussian(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR();
  for (Index j = 0; j < dim; ++j) {
    const cplx diag = r(j, j);
    const double mag = std::abs(diag);
    if (mag > 0) q.col(j) *= diag / mag;
  }
  return q;
}

Vector random_unit_vector(Index dim, Rng& rng) {
  Vector v = random_gaussian(dim, 1, rng).col(0);
  return v / v.norm();
}

}  // namespace phidec
