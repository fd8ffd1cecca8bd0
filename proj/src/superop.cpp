#include "phidec/superop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace phidec {

namespace {

Matrix choi_from_coeffs(Index d, Index h, const Matrix& coeffs) {
  Matrix j(d * h, d * h);
  for (Index i = 0; i < d; ++i)
    for (Index jj = 0; jj < d; ++jj)
      for (Index p = 0; p < h; ++p)
        for (Index q = 0; q < h; ++q) j(i * h + p, jj * h + q) = coeffs(p * h + q, i * d + jj);
  return j;
}

}  // namespace

SuperOperator::SuperOperator(Index d, Index h, Matrix coeffs) : d_(d), h_(h), coeffs_(std::move(coeffs)) {
  if (d <= 0 || h <= 0) throw DimensionError("SuperOperator: dimensions must be positive");
  if (coeffs_.rows() != h * h || coeffs_.cols() != d * d)
    throw DimensionError("SuperOperator: coeffs must be h^2 x d^2");
  if (!coeffs_.allFinite()) throw Error("SuperOperator: non-finite coefficients");
  choi_ = choi_from_coeffs(d, h, coeffs_);
}

SuperOperator SuperOperator::from_choi(Index d, Index h, const Matrix& choi) {
  if (choi.rows() != d * h || choi.cols() != d * h) throw DimensionError("from_choi: Choi matrix must be dh x dh");
  Matrix coeffs(h * h, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      for (Index p = 0; p < h; ++p)
        for (Index q = 0; q < h; ++q) coeffs(p * h + q, i * d + j) = choi(i * h + p, j * h + q);
  return {d, h, std::move(coeffs)};
}

SuperOperator SuperOperator::from_function(Index d, Index h, const std::function<Matrix(const Matrix&)>& f) {
  Matrix coeffs(h * h, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) {
      const Matrix image = f(matrix_unit(d, i, j));
      if (image.rows() != h || image.cols() != h) throw DimensionError("from_function: image has wrong shape");
      coeffs.col(i * d + j) = vec(image);
    }
  return {d, h, std::move(coeffs)};
}

SuperOperator SuperOperator::identity(Index d) {
  return {d, d, Matrix::Identity(d * d, d * d)};
}

SuperOperator SuperOperator::transpose(Index d) {
  return from_function(d, d, [](const Matrix& a) -> Matrix { return a.transpose(); });
}

SuperOperator SuperOperator::zero(Index d, Index h) { return {d, h, Matrix::Zero(h * h, d * d)}; }

SuperOperator SuperOperator::conjugation(const Matrix& k) {
  return from_function(k.cols(), k.rows(), [&k](const Matrix& a) -> Matrix { return k * a * k.adjoint(); });
}

SuperOperator SuperOperator::kraus(const std::vector<Matrix>& ks) {
  if (ks.empty()) throw Error("kraus: empty Kraus list");
  const Index d = ks.front().cols();
  const Index h = ks.front().rows();
  for (const auto& k : ks)
    if (k.rows() != h || k.cols() != d) throw DimensionError("kraus: inconsistent Kraus shapes");
  return from_function(d, h, [&ks, h](const Matrix& a) -> Matrix {
    Matrix out = Matrix::Zero(h, h);
    for (const auto& k : ks) out += k * a * k.adjoint();
    return out;
  });
}

SuperOperator SuperOperator::trace_replace(Index d, Index h, double scale) {
  return from_function(d, h, [h, scale](const Matrix& a) -> Matrix {
    return Matrix(scale * a.trace() * Matrix::Identity(h, h));
  });
}

Matrix SuperOperator::apply(const Matrix& a) const {
  if (a.rows() != d_ || a.cols() != d_) throw DimensionError("apply: input is not d x d");
  return unvec(Vector(coeffs_ * vec(a)), h_, h_);
}

Matrix SuperOperator::ampliate(const Matrix& a, Index n) const {
  if (a.rows() != n * d_ || a.cols() != n * d_) throw DimensionError("ampliate: input is not (n*d) x (n*d)");
  Matrix out(n * h_, n * h_);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out.block(i * h_, j * h_, h_, h_) = apply(a.block(i * d_, j * d_, d_, d_));
  return out;
}

SuperOperator SuperOperator::adjoint() const { return {h_, d_, coeffs_.adjoint()}; }

bool SuperOperator::is_star_map(double tol) const { return star_defect() <= tol * std::max(1.0, choi_.norm()); }

SuperOperator SuperOperator::operator+(const SuperOperator& other) const {
  if (other.d_ != d_ || other.h_ != h_) throw DimensionError("SuperOperator +: dimension mismatch");
  return {d_, h_, coeffs_ + other.coeffs_};
}

SuperOperator SuperOperator::operator-(const SuperOperator& other) const {
  if (other.d_ != d_ || other.h_ != h_) throw DimensionError("SuperOperator -: dimension mismatch");
  return {d_, h_, coeffs_ - other.coeffs_};
}

SuperOperator SuperOperator::operator*(cplx s) const { return {d_, h_, coeffs_ * s}; }

SuperOperator compose(const SuperOperator& psi, const SuperOperator& phi) {
  if (psi.in_dim() != phi.out_dim()) throw DimensionError("compose: psi.d != phi.h");
  return {phi.in_dim(), psi.out_dim(), psi.coeffs() * phi.coeffs()};
}

SpectralVerdict is_cp(const SuperOperator& phi, double tol) {
  const double margin = min_eigenvalue(phi.choi());
  return {margin >= -tol, margin};
}

SpectralVerdict is_ccp(const SuperOperator& phi, double tol) {
  const Matrix jt = partial_transpose(phi.choi(), phi.in_dim(), phi.out_dim(), TransposeSide::outer);
  const double margin = min_eigenvalue(jt);
  return {margin >= -tol, margin};
}

bool is_unital(const SuperOperator& phi, double tol) {
  if (phi.in_dim() != phi.out_dim()) return false;
  const Index d = phi.in_dim();
  return (phi.apply(Matrix::Identity(d, d)) - Matrix::Identity(d, d)).norm() <= tol;
}

bool is_homomorphism(const SuperOperator& phi, double tol) {
  if (phi.in_dim() != phi.out_dim()) return false;
  const Index d = phi.in_dim();
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) {
      const Matrix a = phi.apply(matrix_unit(d, i, j));
      for (Index k = 0; k < d; ++k)
        for (Index l = 0; l < d; ++l) {
          const Matrix b = phi.apply(matrix_unit(d, k, l));
          const Matrix prod = phi.apply(matrix_unit(d, i, j) * matrix_unit(d, k, l));
          if ((prod - a * b).norm() > tol) return false;
        }
    }
  return true;
}

bool is_hs_isometry(const SuperOperator& phi, double tol) {
  if (phi.in_dim() != phi.out_dim()) return false;
  const Matrix& c = phi.coeffs();
  return (c.adjoint() * c - Matrix::Identity(c.cols(), c.cols())).norm() <= tol;
}

NormEstimate estimate_norm(const SuperOperator& phi, int iterations) {
  const Matrix& c = phi.coeffs();
  const double fro = c.norm();
  if (fro == 0.0) return {0.0, 0.0};
  // deterministic start with support on every coordinate
  Vector x = Vector::Ones(c.cols()) / std::sqrt(static_cast<double>(c.cols()));
  x += Vector::LinSpaced(c.cols(), 0.0, 1.0) * cplx(0.0, 0.1);
  x.normalize();
  double est = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector y = c.adjoint() * (c * x);
    const double ny = y.norm();
    if (ny == 0.0) break;
    x = y / ny;
    est = (c * x).norm();
  }
  return {est, fro};
}

PositivityEvidence is_positive_heuristic(const SuperOperator& phi, int samples, int restarts, Rng& rng,
                                         double tol) {
  const Index d = phi.in_dim();
  const Index h = phi.out_dim();
  const SuperOperator dual = phi.adjoint();

  PositivityEvidence best{false, std::numeric_limits<double>::infinity(), Vector(), Vector()};
  auto consider = [&](const Vector& u, const Vector& v) {
    const double value = (v.adjoint() * phi.apply(u * u.adjoint()) * v)(0).real();
    if (value < best.min_value) best = {false, value, u, v};
  };

  for (int s = 0; s < samples; ++s) {
    const Vector u = random_unit_vector(d, rng);
    consider(u, min_eigenpair(phi.apply(u * u.adjoint())).second);
  }

  for (int r = 0; r < restarts; ++r) {
    Vector u = (r == 0 && best.u.size() == d) ? best.u : random_unit_vector(d, rng);
    Vector v(h);
    double last = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
      v = min_eigenpair(phi.apply(u * u.adjoint())).second;
      auto [value, next_u] = min_eigenpair(dual.apply(v * v.adjoint()));
      u = next_u;
      if (std::abs(last - value) <= 1e-14 * std::max(1.0, std::abs(value))) break;
      last = value;
    }
    consider(u, v);
  }
  best.counterexample = best.min_value < -tol;
  return best;
}

ChoiLinearMap::ChoiLinearMap(Index dim, Matrix mat) : dim_(dim), mat_(std::move(mat)) {
  if (mat_.rows() != dim * dim || mat_.cols() != dim * dim) throw DimensionError("ChoiLinearMap: shape mismatch");
}

Matrix ChoiLinearMap::apply(const Matrix& x) const {
  if (x.rows() != dim_ || x.cols() != dim_) throw DimensionError("ChoiLinearMap::apply: shape mismatch");
  return unvec(Vector(mat_ * vec(x)), dim_, dim_);
}

PrecompositionOperator build_precomposition(const SuperOperator& phi_k, Index h) {
  if (phi_k.in_dim() != phi_k.out_dim()) throw DimensionError("build_precomposition: phi_k must map M_d to M_d");
  const Index d = phi_k.in_dim();
  const Index dim = d * h;
  const Matrix& c = phi_k.coeffs();
  Matrix p = Matrix::Zero(dim * dim, dim * dim);
  // block (i,j) of J(psi o phi_k) = sum_ab phi_k(E_ij)_ab * block (a,b) of J(psi)
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      for (Index a = 0; a < d; ++a)
        for (Index b = 0; b < d; ++b) {
          const cplx w = c(a * d + b, i * d + j);
          if (w == cplx(0.0)) continue;
          for (Index r = 0; r < h; ++r)
            for (Index s = 0; s < h; ++s)
              p((i * h + r) * dim + (j * h + s), (a * h + r) * dim + (b * h + s)) = w;
        }
  return {phi_k, h, ChoiLinearMap(dim, std::move(p))};
}

ChoiLinearMap adjoint_precomposition(const PrecompositionOperator& p) { return p.op.adjoint(); }

}  // namespace phidec
