#ifndef PHIDEC_DILATION_HPP
#define PHIDEC_DILATION_HPP

#include <vector>

#include "phidec/decomp.hpp"

namespace phidec {

/// Relative eigenvalue cutoff for Kraus rank: keep lambda > 1e-10 * lambda_max.
inline constexpr double kKrausRankCutoff = 1e-10;

/// psi(a) = V^dagger pi(a) V with pi(a) = a (x) I_r on C^d (x) C^r.
struct StinespringData {
  Index d = 0;
  Index h = 0;
  Index rank = 0;
  std::vector<Matrix> kraus;  // h x d each
  Matrix v;                   // (d * rank) x h

  Index dilation_dim() const { return d * rank; }
  Matrix pi(const Matrix& a) const;
  Matrix reconstruct(const Matrix& a) const { return v.adjoint() * pi(a) * v; }
};

StinespringData stinespring(const SuperOperator& psi, double tol = kDefaultTol);

/// phi(a) = V^dagger rho(a) V with rho(a) = (+)_k pi_k(phi_k(a)) on K = (+)_k K_k.
struct BlockDilation {
  std::vector<StinespringData> parts;
  std::vector<SuperOperator> sequence;
  std::vector<Index> offsets;  // start of K_k inside K
  Index dim = 0;               // dim K
  Index h = 0;
  Matrix v;                    // dim x h, V h = sum_k V_k h

  Matrix rho(const Matrix& a) const;
  /// Orthogonal projection onto K_k.
  Matrix projection(Index k) const;
  Matrix reconstruct(const Matrix& a) const { return v.adjoint() * rho(a) * v; }
};

BlockDilation block_dilation(const DecompositionCertificate& cert, const FeasibilityProblem& prob);

/// eta: M_n(D) -> (+)_k M_n(M_d), where D is block diagonal with m blocks of size d.
/// Input is n(md) x n(md); output is the m matrices [a_k^(ij)]_ij, each (nd) x (nd).
std::vector<Matrix> eta_reshuffle(const Matrix& h, Index n, Index m, Index d, double tol = 1e-12);
/// Block-diagonal assembly of eta's output.
Matrix direct_sum(const std::vector<Matrix>& blocks);

/// Phi on the operator system span xi(M_d), defined by phi = Phi o xi.
class FactoredMap {
 public:
  Index dim() const { return d_; }
  Index terms() const { return m_; }

  /// Phi(x) for x block diagonal (md x md) in span xi(M_d).
  Matrix apply(const Matrix& x) const;
  /// Least-squares preimage a with xi(a) ~ x.
  Matrix preimage(const Matrix& x) const;
  /// Relative distance of x from span xi(M_d).
  double span_residual(const Matrix& x) const;
  /// (id_n (x) Phi) on an element of M_n(span xi(M_d)).
  Matrix ampliate(const Matrix& x, Index n) const;

 private:
  friend FactoredMap build_phi(const SuperOperator&, const MapSequence&, double);
  FactoredMap(SuperOperator phi, Matrix stacked, Matrix pinv, Index d, Index m);

  SuperOperator phi_;
  Matrix stacked_;
  Matrix pinv_;
  Index d_;
  Index m_;
};

/// Refuses (throws) when the kernel condition fails, since Phi is then ill defined.
FactoredMap build_phi(const SuperOperator& phi, const MapSequence& seq, double tol = kDefaultTol);

// ---------------------------------------------------------------------------
// nonunital subalgebras and their unitization

/// Direct sum of full matrix blocks placed on the diagonal of M_D, leaving at least one
/// coordinate uncovered so its unit p differs from I_D. The unitization is {a + z I_D}.
class UnitizedAlgebraModel {
 public:
  /// blocks: sizes of the full matrix blocks; they occupy the leading coordinates of C^D.
  UnitizedAlgebraModel(Index ambient_dim, std::vector<Index> blocks);

  Index ambient_dim() const { return dim_; }
  const std::vector<Index>& blocks() const { return blocks_; }
  const std::vector<Matrix>& basis() const { return basis_; }
  const Matrix& unit() const { return unit_; }

  /// basis of M together with I_D is linearly independent and p != I_D.
  bool faithful() const;

  struct Split {
    Matrix a;
    cplx z;
    double residual;
  };
  /// Decompose x = a + z I_D with a in M.
  Split split(const Matrix& x) const;

  /// Random PSD element of M_n(M).
  Matrix random_positive(Index n, Rng& rng) const;
  /// Random PSD element of M_n(M~); scalar_only draws elements with vanishing M-part.
  Matrix random_positive_unitized(Index n, Rng& rng, bool scalar_only = false) const;

 private:
  Index dim_;
  std::vector<Index> blocks_;
  std::vector<Index> offsets_;
  std::vector<Matrix> basis_;
  Matrix unit_;
};

/// ||T||_cb = ||T(p)|| for T completely positive on a subalgebra with unit p.
double cb_norm_cp(const SuperOperator& t, const UnitizedAlgebraModel& model, double tol = kDefaultTol);

/// T~(a + z I) = T(a) + z * constant * I, with constant = ||T||_cb by default.
class UnitizedExtension {
 public:
  UnitizedExtension(SuperOperator t, UnitizedAlgebraModel model, double constant);

  double constant() const { return constant_; }
  const UnitizedAlgebraModel& model() const { return model_; }
  Matrix apply(const Matrix& x) const;
  Matrix ampliate(const Matrix& x, Index n) const;

 private:
  SuperOperator t_;
  UnitizedAlgebraModel model_;
  double constant_;
};

UnitizedExtension unitized_extension(const SuperOperator& t, const UnitizedAlgebraModel& model,
                                     double tol = kDefaultTol);

struct SampledPositivity {
  bool holds;
  double min_margin;
  int samples;
};

/// Sampled complete-positivity evidence for T~ on M_n(M~) for n = 1..max_n.
SampledPositivity sampled_complete_positivity(const UnitizedExtension& ext, Index max_n, int samples, Rng& rng,
                                              double tol = 1e-9);

}  // namespace phidec

#endif  // PHIDEC_DILATION_HPP
