#include "phidec/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace phidec {

namespace {

EntryFlags compute_flags(const SuperOperator& phi) {
  EntryFlags f;
  f.star = phi.is_star_map();
  f.unital = is_unital(phi);
  f.homomorphism = is_homomorphism(phi);
  f.hs_isometry = is_hs_isometry(phi);
  f.norm = estimate_norm(phi);
  return f;
}

}  // namespace

MapSequence::MapSequence(std::vector<SuperOperator> entries, SequenceKind kind, double tail_bound)
    : entries_(std::move(entries)), kind_(kind), tail_bound_(tail_bound) {
  if (entries_.empty()) throw Error("MapSequence: empty sequence");
  const Index d = entries_.front().in_dim();
  for (const auto& e : entries_) {
    if (e.in_dim() != d || e.out_dim() != d) throw DimensionError("MapSequence: every entry must map M_d to M_d");
    if (!e.is_star_map())
      throw NotHermitianError("MapSequence: entry is not a *-map", e.star_defect());
    flags_.push_back(compute_flags(e));
  }
  if (!(tail_bound_ >= 0.0)) throw Error("MapSequence: tail bound must be nonnegative");
}

MapSequence MapSequence::finite(std::vector<SuperOperator> entries, bool require_unital) {
  MapSequence seq(std::move(entries), SequenceKind::finite_tuple, 0.0);
  if (require_unital && !seq.all_unital()) throw Error("MapSequence: unital tuple requested but an entry is not unital");
  return seq;
}

MapSequence MapSequence::truncated_vanishing(std::vector<SuperOperator> entries, std::optional<double> tail_bound,
                                             Index monotone_from) {
  MapSequence seq(std::move(entries), SequenceKind::truncated_vanishing, 0.0);
  for (Index k = std::max<Index>(monotone_from, 0) + 1; k < seq.size(); ++k) {
    const double prev = seq.flags(k - 1).norm.estimate;
    const double cur = seq.flags(k).norm.estimate;
    if (cur > prev * (1.0 + 1e-9) + 1e-12)
      throw Error("MapSequence: norms must be nonincreasing beyond index " + std::to_string(monotone_from));
  }
  const double last = seq.flags(seq.size() - 1).norm.estimate;
  seq.tail_bound_ = tail_bound.value_or(last);
  if (!(seq.tail_bound_ >= 0.0)) throw Error("MapSequence: tail bound must be nonnegative");
  return seq;
}

bool MapSequence::all_unital() const {
  return std::all_of(flags_.begin(), flags_.end(), [](const EntryFlags& f) { return f.unital; });
}

bool MapSequence::all_hs_isometries() const {
  return std::all_of(flags_.begin(), flags_.end(), [](const EntryFlags& f) { return f.hs_isometry; });
}

bool MapSequence::all_homomorphisms() const {
  return std::all_of(flags_.begin(), flags_.end(), [](const EntryFlags& f) { return f.homomorphism; });
}

Matrix MapSequence::stacked_coeffs() const {
  const Index d2 = dim() * dim();
  Matrix s(size() * d2, d2);
  for (Index k = 0; k < size(); ++k) s.middleRows(k * d2, d2) = entries_[static_cast<size_t>(k)].coeffs();
  return s;
}

MapSequence canonical(std::string_view name, Index d) {
  if (name == "cp") return MapSequence::finite({SuperOperator::identity(d)});
  if (name == "ccp") return MapSequence::finite({SuperOperator::transpose(d)});
  if (name == "decomposable") return MapSequence::finite({SuperOperator::identity(d), SuperOperator::transpose(d)});
  throw Error("canonical: unknown sequence name '" + std::string(name) + "'");
}

MapSequence geometric_identity_sequence(Index d, Index count) {
  std::vector<SuperOperator> entries;
  for (Index k = 1; k <= count; ++k)
    entries.push_back(SuperOperator::identity(d) * cplx(std::ldexp(1.0, static_cast<int>(1 - k))));
  return MapSequence::truncated_vanishing(std::move(entries));
}

KernelCheck kernel_condition(const MapSequence& seq, const SuperOperator& phi, double tol) {
  if (phi.in_dim() != seq.dim()) throw DimensionError("kernel_condition: phi and sequence act on different M_d");
  const Index d = seq.dim();
  KernelCheck out{true, null_space(seq.stacked_coeffs(), tol), 0.0};
  for (Index c = 0; c < out.kernel_basis.cols(); ++c) {
    const double v = phi.apply(unvec(Vector(out.kernel_basis.col(c)), d, d)).norm();
    out.max_violation = std::max(out.max_violation, v);
  }
  out.holds = out.max_violation <= tol;
  return out;
}

XiEmbedding xi_embed(const Matrix& a, const MapSequence& seq) {
  const Index d = seq.dim();
  if (a.rows() != d || a.cols() != d) throw DimensionError("xi_embed: input is not d x d");
  BlockMatrix out(seq.size(), d);
  for (Index k = 0; k < seq.size(); ++k) out.block(k, k) = seq[k].apply(a);
  return {std::move(out), seq.tail_bound() * operator_norm(a)};
}

ClosureEvidence algebra_closure_check(const MapSequence& seq, int samples, double tol, Rng& rng) {
  const Index d = seq.dim();
  const Index d2 = d * d;
  const Matrix s = seq.stacked_coeffs();
  // orthonormal basis of range(S) = span of stacked xi(E_ij)
  Eigen::JacobiSVD<Matrix> svd(s, Eigen::ComputeThinU);
  const RealVector& sv = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-12 * std::max(1.0, sv(0))) ++rank;
  const Matrix q = svd.matrixU().leftCols(rank);

  auto stacked = [&](const Matrix& block_diag_source, bool product, const Matrix& other) {
    Vector v(seq.size() * d2);
    for (Index k = 0; k < seq.size(); ++k) {
      Matrix blk = seq[k].apply(block_diag_source);
      if (product) blk = blk * seq[k].apply(other);
      v.segment(k * d2, d2) = vec(blk);
    }
    return v;
  };

  ClosureEvidence ev{true, 0.0, 0.0};
  for (int i = 0; i < samples; ++i) {
    const Matrix a = random_gaussian(d, d, rng);
    const Matrix b = random_gaussian(d, d, rng);
    const Vector prod = stacked(a, true, b);
    const Vector resid = prod - q * (q.adjoint() * prod);
    ev.max_product_residual = std::max(ev.max_product_residual, resid.norm() / std::max(1.0, prod.norm()));

    const Matrix xa = xi_embed(a, seq).value.flat();
    const Matrix xa_dag = xi_embed(Matrix(a.adjoint()), seq).value.flat();
    ev.max_adjoint_defect = std::max(ev.max_adjoint_defect, (Matrix(xa.adjoint()) - xa_dag).norm());
  }
  ev.holds = ev.max_product_residual <= tol && ev.max_adjoint_defect <= tol;
  return ev;
}

}  // namespace phidec
