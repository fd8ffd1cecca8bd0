#ifndef PHIDEC_GAMMA_HPP
#define PHIDEC_GAMMA_HPP

#include <vector>

#include "phidec/sequence.hpp"

namespace phidec {

/// Margin separating "member" (>= -1e-8) from "violation" (< -1e-6) verdicts.
inline constexpr double kViolationThreshold = 1e-6;

struct GammaMembership {
  bool member;
  std::vector<double> margins;  // lambda_min([phi_k(a_ij)]) per k
};

/// A is in Gamma_n^+(phi) iff [phi_k(a_ij)]_ij is PSD for every k.
GammaMembership gamma_membership(const BlockMatrix& a, const MapSequence& seq, double tol = kDefaultTol);

struct GammaProjection {
  Matrix value;
  int iterations;
  bool converged;
};

/// Dykstra projection onto Gamma_n^+(phi). Requires every phi_k to be an HS isometry,
/// so each pulled-back PSD cone has the exact projection U^* Pi_psd(U .).
GammaProjection gamma_project(const Matrix& start, const MapSequence& seq, Index n, int max_iter,
                              double tol = kDefaultTol);

struct GammaSample {
  BlockMatrix element;
  bool found;
  bool used_rejection;  // true when the sequence has non-isometric entries
  int iterations;
};

/// Random element of Gamma_n^+(phi), trace-normalized.
GammaSample gamma_sample(const MapSequence& seq, Index n, int max_iter, double tol, Rng& rng);

struct SearchOptions {
  int steps_per_restart = 150;
  int projection_iterations = 400;
  double membership_tol = kDefaultTol;
};

struct ViolationReport {
  bool violation;
  BlockMatrix a;      // trace-normalized member of Gamma_n^+(phi), valid when violation is true
  Vector v;           // unit vector with <v, (id_n (x) phi)(A) v> = value
  double value;       // value of the reported pair, or the best value found otherwise
  bool used_rejection;
};

/// See-saw search for A in Gamma_n^+(phi) with (id_n (x) phi)(A) not PSD.
/// A violation is only reported after independent re-verification; none found is not a proof.
ViolationReport criterion_violation_search(const SuperOperator& phi, const MapSequence& seq, Index n,
                                           int restarts, Rng& rng, const SearchOptions& options = {});

struct ViolationCheck {
  bool valid;
  double membership_margin;
  double value;
};

/// Re-checks a reported violation from scratch.
ViolationCheck verify_violation(const SuperOperator& phi, const MapSequence& seq, const BlockMatrix& a,
                                const Vector& v, double membership_tol = kDefaultTol);

}  // namespace phidec

#endif  // PHIDEC_GAMMA_HPP
