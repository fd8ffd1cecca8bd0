#ifndef PHIDEC_DECOMP_HPP
#define PHIDEC_DECOMP_HPP

#include <optional>
#include <string>
#include <vector>

#include "phidec/sequence.hpp"

namespace phidec {

struct FeasibilityOptions {
  double psd_tol = kDefaultTol;
  /// residual tolerance is feas_rel_tol * max(1, ||J(phi)||_F)
  double feas_rel_tol = 1e-7;
  double kernel_tol = kDefaultTol;
  /// witness acceptance: pairing <= -pairing_tol, dual margins >= -dual_tol (W unit Frobenius norm)
  double pairing_tol = 1e-6;
  double dual_tol = 1e-9;
  int max_iter = 50000;
  int stall_window = 500;
  double stall_rel_decrease = 1e-12;
};

/// Membership of phi in the cone generated by (phi_k), posed at the Choi level:
/// find PSD X_k with sum_k P_k(X_k) = J(phi).
class FeasibilityProblem {
 public:
  FeasibilityProblem(SuperOperator target, MapSequence seq, FeasibilityOptions options = {});

  const SuperOperator& target() const { return target_; }
  const MapSequence& sequence() const { return seq_; }
  const std::vector<PrecompositionOperator>& precomps() const { return precomps_; }
  const FeasibilityOptions& options() const { return options_; }

  Index in_dim() const { return target_.in_dim(); }
  Index out_dim() const { return target_.out_dim(); }
  /// Side length dh of each Choi matrix.
  Index choi_dim() const { return in_dim() * out_dim(); }
  Index terms() const { return seq_.size(); }
  double feasibility_tolerance() const;

  /// sum_k P_k(X_k).
  Matrix reconstruct(const std::vector<Matrix>& xs) const;

 private:
  SuperOperator target_;
  MapSequence seq_;
  std::vector<PrecompositionOperator> precomps_;
  FeasibilityOptions options_;
};

struct DecompositionCertificate {
  std::vector<Matrix> choi;  // X_k = J(psi_k)
  double residual = 0.0;
};

struct InfeasibilityWitness {
  Matrix w;          // unit Frobenius norm
  double gap = 0.0;  // -<W, J(phi)>
};

enum class Verdict { feasible, infeasible, undetermined };

std::string to_string(Verdict v);

struct FeasibilityResult {
  Verdict verdict = Verdict::undetermined;
  std::optional<DecompositionCertificate> certificate;
  std::optional<InfeasibilityWitness> witness;
  int iterations = 0;
  bool kernel_condition_holds = true;
  /// Error from omitted tail terms per unit ||a||: tail_bound * ||sum_k psi_k(I)||.
  double tail_slack = 0.0;
  std::vector<double> distance_trace;  // distance between the two iterates at each checkpoint
  std::string diagnostics;
};

FeasibilityResult feasibility(const FeasibilityProblem& prob);

/// Polishes an approximate certificate on the face of its numerical support, for several
/// rank cutoffs: a minimum-norm least-squares correction on the support, and Levenberg-Marquardt
/// on low-rank factors X_k = L_k L_k^dagger. Returns the verified certificate with the
/// smallest residual, which is the input itself when no refinement verifies.
DecompositionCertificate refine_certificate(const DecompositionCertificate& cert, const FeasibilityProblem& prob);

struct CertificateCheck {
  bool valid;
  double min_eigenvalue;
  double residual;
};

/// Re-checks both certificate invariants from scratch.
CertificateCheck verify_certificate(const DecompositionCertificate& cert, const FeasibilityProblem& prob,
                                    double psd_tol = kDefaultTol);

struct WitnessCheck {
  bool valid;
  double pairing;          // <W, J(phi)> with W scaled to unit Frobenius norm
  double min_dual_margin;  // min_k lambda_min(P_k^*(W))
};

WitnessCheck verify_witness(const Matrix& w, const FeasibilityProblem& prob, double dual_tol = 1e-9,
                            double pairing_tol = 1e-6);

/// Certificate for lambda1 * phi_A + lambda2 * phi_B.
DecompositionCertificate conic_combine(const DecompositionCertificate& a, const DecompositionCertificate& b,
                                       double lambda1, double lambda2);

/// Certificate for psi o phi from one for phi, with X_k' = (id_d (x) psi)(X_k).
DecompositionCertificate left_compose(const DecompositionCertificate& cert, const SuperOperator& psi,
                                      double tol = kDefaultTol);

struct ClosednessProbe {
  bool passed;  // limit was not certified infeasible
  Verdict limit_verdict;
  std::vector<Verdict> member_verdicts;
};

/// Solves every member of a Choi-norm convergent sequence and then its limit.
ClosednessProbe closedness_probe(const FeasibilityProblem& limit, const std::vector<SuperOperator>& members);

}  // namespace phidec

#endif  // PHIDEC_DECOMP_HPP
