#ifndef PHIDEC_SEQUENCE_HPP
#define PHIDEC_SEQUENCE_HPP

#include <optional>
#include <string_view>
#include <vector>

#include "phidec/superop.hpp"

namespace phidec {

enum class SequenceKind { finite_tuple, truncated_vanishing };

struct EntryFlags {
  bool star = false;
  bool unital = false;
  bool homomorphism = false;
  bool hs_isometry = false;
  NormEstimate norm{0.0, 0.0};
};

/// The defining sequence (phi_k) of *-maps on M_d.
///
/// Infinite vanishing sequences are stored as a truncation together with a bound on
/// the norms of every omitted entry; downstream quantities carry tail_bound * ||a||
/// as an explicit error term.
class MapSequence {
 public:
  static MapSequence finite(std::vector<SuperOperator> entries, bool require_unital = false);
  /// tail_bound defaults to the norm of the last retained entry, which bounds every
  /// omitted norm when the norms are nonincreasing from monotone_from onwards.
  static MapSequence truncated_vanishing(std::vector<SuperOperator> entries,
                                         std::optional<double> tail_bound = std::nullopt,
                                         Index monotone_from = 0);

  Index dim() const { return entries_.front().in_dim(); }
  Index size() const { return static_cast<Index>(entries_.size()); }
  SequenceKind kind() const { return kind_; }
  double tail_bound() const { return tail_bound_; }
  const std::vector<SuperOperator>& entries() const { return entries_; }
  const SuperOperator& operator[](Index k) const { return entries_[static_cast<size_t>(k)]; }
  const EntryFlags& flags(Index k) const { return flags_[static_cast<size_t>(k)]; }

  bool all_unital() const;
  bool all_hs_isometries() const;
  bool all_homomorphisms() const;

  /// Stacked coefficient matrix (m d^2) x d^2; its kernel is the common kernel of all phi_k.
  Matrix stacked_coeffs() const;

 private:
  MapSequence(std::vector<SuperOperator> entries, SequenceKind kind, double tail_bound);

  std::vector<SuperOperator> entries_;
  std::vector<EntryFlags> flags_;
  SequenceKind kind_;
  double tail_bound_;
};

/// "cp" -> (id), "ccp" -> (t), "decomposable" -> (id, t) on M_d.
MapSequence canonical(std::string_view name, Index d);

/// phi_k = 2^(1-k) id for k = 1..count, as a truncated vanishing sequence.
MapSequence geometric_identity_sequence(Index d, Index count);

struct KernelCheck {
  bool holds;
  Matrix kernel_basis;   // columns are vec() of an orthonormal basis of the common kernel
  double max_violation;  // max ||phi(v)||_F over the basis
};

/// Necessary condition: the common kernel of (phi_k) lies in ker phi.
KernelCheck kernel_condition(const MapSequence& seq, const SuperOperator& phi, double tol = kDefaultTol);

struct XiEmbedding {
  BlockMatrix value;        // block diagonal, block k = phi_k(a)
  double truncation_error;  // tail_bound * ||a||, zero for finite tuples
};

XiEmbedding xi_embed(const Matrix& a, const MapSequence& seq);

struct ClosureEvidence {
  bool holds;
  double max_product_residual;  // relative least-squares distance of xi(a) xi(b) from span xi(M_d)
  double max_adjoint_defect;    // max ||xi(a)^dagger - xi(a^dagger)||_F
};

/// Sampling evidence that xi(M_d) is closed under products and adjoints.
ClosureEvidence algebra_closure_check(const MapSequence& seq, int samples, double tol, Rng& rng);

}  // namespace phidec

#endif  // PHIDEC_SEQUENCE_HPP
