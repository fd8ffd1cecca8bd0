#ifndef PHIDEC_SUPEROP_HPP
#define PHIDEC_SUPEROP_HPP

#include <functional>
#include <vector>

#include "phidec/linalg.hpp"

namespace phidec {

/// A linear map M_d -> M_h stored by its action on matrix units.
///
/// coeffs is h^2 x d^2; column i*d + j holds vec(phi(E_ij)) in row-major order.
/// The Choi matrix J(phi) = sum_ij E_ij (x) phi(E_ij) is computed at construction,
/// so J(i*h + p, j*h + q) = phi(E_ij)(p, q).
class SuperOperator {
 public:
  SuperOperator(Index d, Index h, Matrix coeffs);

  static SuperOperator from_choi(Index d, Index h, const Matrix& choi);
  static SuperOperator from_function(Index d, Index h, const std::function<Matrix(const Matrix&)>& f);

  static SuperOperator identity(Index d);
  static SuperOperator transpose(Index d);
  static SuperOperator zero(Index d, Index h);
  /// a -> K a K^dagger with K of shape h x d.
  static SuperOperator conjugation(const Matrix& k);
  /// a -> sum_i K_i a K_i^dagger.
  static SuperOperator kraus(const std::vector<Matrix>& ks);
  /// a -> scale * tr(a) * I_h.
  static SuperOperator trace_replace(Index d, Index h, double scale);

  Index in_dim() const { return d_; }
  Index out_dim() const { return h_; }
  const Matrix& coeffs() const { return coeffs_; }
  const Matrix& choi() const { return choi_; }

  Matrix apply(const Matrix& a) const;
  /// (id_n (x) phi) applied to an (n*d) x (n*d) block matrix.
  Matrix ampliate(const Matrix& a, Index n) const;
  /// Hilbert-Schmidt adjoint M_h -> M_d.
  SuperOperator adjoint() const;

  /// ||J - J^dagger||_F.
  double star_defect() const { return hermitian_defect(choi_); }
  bool is_star_map(double tol = kHermitianSymmetrizeTol) const;

  SuperOperator operator+(const SuperOperator& other) const;
  SuperOperator operator-(const SuperOperator& other) const;
  SuperOperator operator*(cplx s) const;

 private:
  Index d_;
  Index h_;
  Matrix coeffs_;
  Matrix choi_;
};

inline SuperOperator operator*(cplx s, const SuperOperator& phi) { return phi * s; }

/// psi o phi; requires psi.in_dim() == phi.out_dim().
SuperOperator compose(const SuperOperator& psi, const SuperOperator& phi);

struct SpectralVerdict {
  bool holds;
  double margin;  // minimum eigenvalue of the tested Choi matrix
};

/// Complete positivity: lambda_min(J(phi)) >= -tol. Throws NotHermitianError for non-*-maps.
SpectralVerdict is_cp(const SuperOperator& phi, double tol = kDefaultTol);
/// Complete copositivity: lambda_min of J(phi o t) >= -tol.
SpectralVerdict is_ccp(const SuperOperator& phi, double tol = kDefaultTol);

/// ||phi(I_d) - I_h||_F <= tol; false whenever d != h.
bool is_unital(const SuperOperator& phi, double tol = kDefaultTol);
/// phi(E_ij E_kl) = phi(E_ij) phi(E_kl) on all matrix units (d == h only).
bool is_homomorphism(const SuperOperator& phi, double tol = kDefaultTol);
/// Coefficient matrix is unitary, i.e. phi preserves the Hilbert-Schmidt norm.
bool is_hs_isometry(const SuperOperator& phi, double tol = kDefaultTol);

struct NormEstimate {
  double estimate;        // power-iteration estimate of the HS-induced operator norm
  double hs_upper_bound;  // Frobenius norm of coeffs
};

NormEstimate estimate_norm(const SuperOperator& phi, int iterations = 200);

struct PositivityEvidence {
  bool counterexample;
  double min_value;  // smallest <v, phi(u u^dagger) v> found
  Vector u;
  Vector v;
};

/// Evidence-only search for a PSD input mapped outside the PSD cone.
/// Random sampling followed by see-saw minimization over unit vectors (u, v).
/// A negative result is never a proof of positivity.
PositivityEvidence is_positive_heuristic(const SuperOperator& phi, int samples, int restarts, Rng& rng,
                                         double tol = kDefaultTol);

// ---------------------------------------------------------------------------
// precomposition at the Choi level

/// A linear operator on dim x dim matrices, stored as a dim^2 x dim^2 matrix acting on vec().
/// The row-major vectorization is unitary, so the HS adjoint is the conjugate transpose.
class ChoiLinearMap {
 public:
  ChoiLinearMap(Index dim, Matrix mat);

  Index dim() const { return dim_; }
  const Matrix& matrix() const { return mat_; }
  Matrix apply(const Matrix& x) const;
  ChoiLinearMap adjoint() const { return {dim_, mat_.adjoint()}; }

 private:
  Index dim_;
  Matrix mat_;
};

/// P_k with P_k(J(psi)) = J(psi o phi_k) for every psi: M_d -> M_h.
/// P_k = L_k (x) id_h where L_k acts on the first tensor factor.
struct PrecompositionOperator {
  SuperOperator source;
  Index h;
  ChoiLinearMap op;

  Matrix apply(const Matrix& choi) const { return op.apply(choi); }
};

PrecompositionOperator build_precomposition(const SuperOperator& phi_k, Index h);
ChoiLinearMap adjoint_precomposition(const PrecompositionOperator& p);

}  // namespace phidec

#endif  // PHIDEC_SUPEROP_HPP
