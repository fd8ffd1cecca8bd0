#ifndef PHIDEC_LINALG_HPP
#define PHIDEC_LINALG_HPP

#include <complex>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace phidec {

using Index = Eigen::Index;
using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Rng = std::mt19937_64;

/// Default absolute tolerance for PSD and equality checks.
inline constexpr double kDefaultTol = 1e-8;
/// Relative Hermiticity defect below which inputs are silently symmetrized.
inline constexpr double kHermitianSymmetrizeTol = 1e-10;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NotHermitianError : public Error {
 public:
  NotHermitianError(const std::string& what, double defect)
      : Error(what + " (hermiticity defect " + std::to_string(defect) + ")"), defect_(defect) {}
  double defect() const { return defect_; }

 private:
  double defect_;
};

// ---------------------------------------------------------------------------
// elementary helpers, templated on the Eigen expression type

template <typename Derived>
double hermitian_defect(const Eigen::MatrixBase<Derived>& m) {
  return (m - m.adjoint()).norm();
}

/// Hilbert-Schmidt inner product tr(a^dagger b).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar hs_inner(const Eigen::MatrixBase<DerivedA>& a,
                                   const Eigen::MatrixBase<DerivedB>& b) {
  return (a.conjugate().cwiseProduct(b)).sum();
}

/// Row-major vectorization: vec(a)[i * cols + j] = a(i, j).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> vec(const Eigen::MatrixBase<Derived>& a) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> v(a.size());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) v(i * a.cols() + j) = a(i, j);
  return v;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> unvec(
    const Eigen::MatrixBase<Derived>& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw DimensionError("unvec: size mismatch");
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = v(i * cols + j);
  return a;
}

template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                                              a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

enum class TransposeSide { outer, inner };

/// Partial transpose of an (n*d) x (n*d) matrix viewed as n x n blocks of size d.
/// outer: block(i,j) <- block(j,i); inner: every block transposed in place.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> partial_transpose(
    const Eigen::MatrixBase<Derived>& m, Index n, Index d, TransposeSide side) {
  if (m.rows() != n * d || m.cols() != n * d) throw DimensionError("partial_transpose: shape mismatch");
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(n * d, n * d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index p = 0; p < d; ++p)
        for (Index q = 0; q < d; ++q) {
          if (side == TransposeSide::outer)
            out(i * d + p, j * d + q) = m(j * d + p, i * d + q);
          else
            out(i * d + p, j * d + q) = m(i * d + q, j * d + p);
        }
  return out;
}

// ---------------------------------------------------------------------------
// block matrices: elements of M_n(M_d)

class BlockMatrix {
 public:
  BlockMatrix(Index n, Index d) : n_(n), d_(d), flat_(Matrix::Zero(n * d, n * d)) {}
  BlockMatrix(Index n, Index d, Matrix flat);

  Index outer() const { return n_; }
  Index inner() const { return d_; }
  const Matrix& flat() const { return flat_; }
  Matrix& flat() { return flat_; }

  auto block(Index i, Index j) const { return flat_.block(i * d_, j * d_, d_, d_); }
  auto block(Index i, Index j) { return flat_.block(i * d_, j * d_, d_, d_); }

  BlockMatrix adjoint() const { return {n_, d_, flat_.adjoint()}; }

 private:
  Index n_;
  Index d_;
  Matrix flat_;
};

BlockMatrix partial_transpose(const BlockMatrix& m, TransposeSide side);

// ---------------------------------------------------------------------------
// spectral routines

struct EigenDecomposition {
  RealVector values;  // ascending
  Matrix vectors;     // unitary, columns are eigenvectors
};

/// Returns (m + m^dagger)/2 if the relative defect is below tolerance, throws otherwise.
Matrix hermitize(const Matrix& m, double rel_tol = kHermitianSymmetrizeTol);

EigenDecomposition eigh(const Matrix& m);
double min_eigenvalue(const Matrix& m);
/// Minimum eigenpair of a Hermitian matrix.
std::pair<double, Vector> min_eigenpair(const Matrix& m);

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped).
Matrix psd_project(const Matrix& m);

/// Orthonormal basis (as columns) of ker l; singular values <= tol * sigma_max count as zero.
Matrix null_space(const Matrix& l, double tol);

/// Largest singular value.
double operator_norm(const Matrix& m);

// ---------------------------------------------------------------------------
// standard matrices

Matrix matrix_unit(Index n, Index i, Index j);
/// Swap operator on C^d (x) C^d.
Matrix swap_operator(Index d);
/// Unnormalized maximally entangled projector sum_ij |ii><jj|.
Matrix max_entangled(Index d);

// ---------------------------------------------------------------------------
// random ensembles

Matrix random_gaussian(Index rows, Index cols, Rng& rng);
Matrix random_hermitian(Index dim, Rng& rng);
/// G G^dagger with i.i.d. standard complex Gaussian G.
Matrix random_psd(Index dim, Rng& rng, Index rank = -1);
/// Haar unitary from the QR of a complex Ginibre matrix.
Matrix random_unitary(Index dim, Rng& rng);
Vector random_unit_vector(Index dim, Rng& rng);

}  // namespace phidec

#endif  // PHIDEC_LINALG_HPP
