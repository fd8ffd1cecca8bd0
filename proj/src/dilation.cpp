#include "phidec/dilation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace phidec {

Matrix StinespringData::pi(const Matrix& a) const {
  return kron(a, Matrix::Identity(rank, rank));
}

StinespringData stinespring(const SuperOperator& psi, double tol) {
  const auto cp = is_cp(psi, tol);
  if (!cp.holds) throw Error("stinespring: map is not completely positive (margin " + std::to_string(cp.margin) + ")");
  const Index d = psi.in_dim();
  const Index h = psi.out_dim();
  StinespringData out;
  out.d = d;
  out.h = h;
  const auto e = eigh(psi.choi());
  const double lmax = e.values.size() ? e.values.maxCoeff() : 0.0;
  for (Index i = e.values.size() - 1; i >= 0; --i) {
    const double lambda = e.values(i);
    if (!(lambda > kKrausRankCutoff * lmax) || !(lambda > 0)) break;
    Matrix k(h, d);
    for (Index a = 0; a < d; ++a)
      for (Index p = 0; p < h; ++p) k(p, a) = std::sqrt(lambda) * e.vectors(a * h + p, i);
    out.kraus.push_back(std::move(k));
  }
  out.rank = static_cast<Index>(out.kraus.size());
  out.v = Matrix::Zero(d * out.rank, h);
  // row a*r + i of V is K_i^dagger restricted to output a: V x = sum_i (K_i^dagger x) (x) e_i
  for (Index i = 0; i < out.rank; ++i)
    for (Index a = 0; a < d; ++a)
      out.v.row(a * out.rank + i) = out.kraus[static_cast<size_t>(i)].col(a).adjoint();
  return out;
}

Matrix BlockDilation::rho(const Matrix& a) const {
  Matrix out = Matrix::Zero(dim, dim);
  for (size_t k = 0; k < parts.size(); ++k) {
    const Index size = parts[k].dilation_dim();
    if (size == 0) continue;
    out.block(offsets[k], offsets[k], size, size) = parts[k].pi(sequence[k].apply(a));
  }
  return out;
}

Matrix BlockDilation::projection(Index k) const {
  Matrix p = Matrix::Zero(dim, dim);
  const Index size = parts[static_cast<size_t>(k)].dilation_dim();
  p.block(offsets[static_cast<size_t>(k)], offsets[static_cast<size_t>(k)], size, size).setIdentity();
  return p;
}

BlockDilation block_dilation(const DecompositionCertificate& cert, const FeasibilityProblem& prob) {
  if (!verify_certificate(cert, prob, prob.options().psd_tol).valid)
    throw Error("block_dilation: certificate does not verify");
  BlockDilation out;
  out.h = prob.out_dim();
  for (Index k = 0; k < prob.terms(); ++k) {
    const auto psi = SuperOperator::from_choi(prob.in_dim(), prob.out_dim(), cert.choi[static_cast<size_t>(k)]);
    out.parts.push_back(stinespring(psi, prob.options().psd_tol));
    out.sequence.push_back(prob.sequence()[k]);
    out.offsets.push_back(out.dim);
    out.dim += out.parts.back().dilation_dim();
  }
  out.v = Matrix::Zero(out.dim, out.h);
  for (size_t k = 0; k < out.parts.size(); ++k)
    out.v.middleRows(out.offsets[k], out.parts[k].dilation_dim()) = out.parts[k].v;
  return out;
}

std::vector<Matrix> eta_reshuffle(const Matrix& h, Index n, Index m, Index d, double tol) {
  const Index md = m * d;
  if (h.rows() != n * md || h.cols() != n * md) throw DimensionError("eta_reshuffle: input is not n(md) x n(md)");
  std::vector<Matrix> out(static_cast<size_t>(m), Matrix::Zero(n * d, n * d));
  double off_diagonal = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < m; ++k)
        for (Index l = 0; l < m; ++l) {
          const auto blk = h.block(i * md + k * d, j * md + l * d, d, d);
          if (k == l)
            out[static_cast<size_t>(k)].block(i * d, j * d, d, d) = blk;
          else
            off_diagonal = std::max(off_diagonal, blk.cwiseAbs().maxCoeff());
        }
  if (off_diagonal > tol * std::max(1.0, h.cwiseAbs().maxCoeff()))
    throw Error("eta_reshuffle: entries are not block diagonal");
  return out;
}

Matrix direct_sum(const std::vector<Matrix>& blocks) {
  Index total = 0;
  for (const auto& b : blocks) total += b.rows();
  Matrix out = Matrix::Zero(total, total);
  Index offset = 0;
  for (const auto& b : blocks) {
    out.block(offset, offset, b.rows(), b.cols()) = b;
    offset += b.rows();
  }
  return out;
}

FactoredMap::FactoredMap(SuperOperator phi, Matrix stacked, Matrix pinv, Index d, Index m)
    : phi_(std::move(phi)), stacked_(std::move(stacked)), pinv_(std::move(pinv)), d_(d), m_(m) {}

namespace {

Vector stack_diagonal(const Matrix& x, Index m, Index d) {
  if (x.rows() != m * d || x.cols() != m * d) throw DimensionError("FactoredMap: input is not (md) x (md)");
  Vector v(m * d * d);
  for (Index k = 0; k < m; ++k) v.segment(k * d * d, d * d) = vec(Matrix(x.block(k * d, k * d, d, d)));
  return v;
}

}  // namespace

Matrix FactoredMap::preimage(const Matrix& x) const {
  return unvec(Vector(pinv_ * stack_diagonal(x, m_, d_)), d_, d_);
}

Matrix FactoredMap::apply(const Matrix& x) const { return phi_.apply(preimage(x)); }

double FactoredMap::span_residual(const Matrix& x) const {
  const Vector v = stack_diagonal(x, m_, d_);
  Matrix off = x;
  for (Index k = 0; k < m_; ++k) off.block(k * d_, k * d_, d_, d_).setZero();
  const double resid = std::hypot((v - stacked_ * (pinv_ * v)).norm(), off.norm());
  return resid / std::max(1.0, x.norm());
}

Matrix FactoredMap::ampliate(const Matrix& x, Index n) const {
  const Index md = m_ * d_;
  const Index h = phi_.out_dim();
  if (x.rows() != n * md || x.cols() != n * md) throw DimensionError("FactoredMap::ampliate: shape mismatch");
  Matrix out(n * h, n * h);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out.block(i * h, j * h, h, h) = apply(x.block(i * md, j * md, md, md));
  return out;
}

FactoredMap build_phi(const SuperOperator& phi, const MapSequence& seq, double tol) {
  const auto kc = kernel_condition(seq, phi, tol);
  if (!kc.holds) throw Error("build_phi: kernel condition fails, Phi is not well defined");
  Matrix stacked = seq.stacked_coeffs();
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(stacked);
  cod.setThreshold(tol);
  Matrix pinv = cod.pseudoInverse();
  return {phi, std::move(stacked), std::move(pinv), seq.dim(), seq.size()};
}

UnitizedAlgebraModel::UnitizedAlgebraModel(Index ambient_dim, std::vector<Index> blocks)
    : dim_(ambient_dim), blocks_(std::move(blocks)), unit_(Matrix::Zero(ambient_dim, ambient_dim)) {
  Index offset = 0;
  for (Index s : blocks_) {
    if (s <= 0) throw DimensionError("UnitizedAlgebraModel: block sizes must be positive");
    if (offset + s > dim_) throw DimensionError("UnitizedAlgebraModel: blocks exceed the ambient dimension");
    offsets_.push_back(offset);
    for (Index i = 0; i < s; ++i)
      for (Index j = 0; j < s; ++j) basis_.push_back(matrix_unit(dim_, offset + i, offset + j));
    unit_.block(offset, offset, s, s).setIdentity();
    offset += s;
  }
  if (!faithful()) throw Error("UnitizedAlgebraModel: subalgebra unit coincides with the ambient identity");
}

bool UnitizedAlgebraModel::faithful() const {
  if ((unit_ - Matrix::Identity(dim_, dim_)).norm() < 1e-12) return false;
  Matrix b(dim_ * dim_, static_cast<Index>(basis_.size()) + 1);
  for (size_t c = 0; c < basis_.size(); ++c) b.col(static_cast<Index>(c)) = vec(basis_[c]);
  b.col(b.cols() - 1) = vec(Matrix(Matrix::Identity(dim_, dim_)));
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(b);
  return cod.rank() == b.cols();
}

UnitizedAlgebraModel::Split UnitizedAlgebraModel::split(const Matrix& x) const {
  if (x.rows() != dim_ || x.cols() != dim_) throw DimensionError("UnitizedAlgebraModel::split: shape mismatch");
  Matrix b(dim_ * dim_, static_cast<Index>(basis_.size()) + 1);
  for (size_t c = 0; c < basis_.size(); ++c) b.col(static_cast<Index>(c)) = vec(basis_[c]);
  b.col(b.cols() - 1) = vec(Matrix(Matrix::Identity(dim_, dim_)));
  const Vector target = vec(x);
  const Vector coef = b.completeOrthogonalDecomposition().solve(target);
  Matrix a = Matrix::Zero(dim_, dim_);
  for (size_t c = 0; c < basis_.size(); ++c) a += coef(static_cast<Index>(c)) * basis_[c];
  return {a, coef(coef.size() - 1), (b * coef - target).norm()};
}

Matrix UnitizedAlgebraModel::random_positive(Index n, Rng& rng) const {
  std::uniform_int_distribution<Index> rank_dist(1, n);
  Matrix out = Matrix::Zero(n * dim_, n * dim_);
  for (size_t b = 0; b < blocks_.size(); ++b) {
    const Index s = blocks_[b];
    const Index o = offsets_[b];
    const Matrix p = random_psd(n * s, rng, rank_dist(rng) * s);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) out.block(i * dim_ + o, j * dim_ + o, s, s) = p.block(i * s, j * s, s, s);
  }
  return out / std::max(1e-300, out.trace().real());
}

Matrix UnitizedAlgebraModel::random_positive_unitized(Index n, Rng& rng, bool scalar_only) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<Index> rank_dist(1, n);
  Matrix lambda = random_psd(n, rng, rank_dist(rng));
  lambda /= lambda.trace().real();
  // x = b + Lambda (x) (I - p) with b in M_n(M)^+ is positive in M_n(M~)
  Matrix out = kron(lambda, Matrix(Matrix::Identity(dim_, dim_) - unit_));
  if (!scalar_only) {
    const double u = unif(rng);
    out += (u * u * u) * random_positive(n, rng);
  }
  return out;
}

double cb_norm_cp(const SuperOperator& t, const UnitizedAlgebraModel& model, double tol) {
  if (t.in_dim() != model.ambient_dim()) throw DimensionError("cb_norm_cp: map does not act on the ambient algebra");
  const Index h = t.out_dim();
  Index offset = 0;
  for (Index s : model.blocks()) {
    Matrix choi = Matrix::Zero(s * h, s * h);
    for (Index i = 0; i < s; ++i)
      for (Index j = 0; j < s; ++j)
        choi.block(i * h, j * h, h, h) = t.apply(matrix_unit(model.ambient_dim(), offset + i, offset + j));
    const double margin = min_eigenvalue(choi);
    if (margin < -tol) throw Error("cb_norm_cp: map is not completely positive on the subalgebra");
    offset += s;
  }
  return operator_norm(t.apply(model.unit()));
}

UnitizedExtension::UnitizedExtension(SuperOperator t, UnitizedAlgebraModel model, double constant)
    : t_(std::move(t)), model_(std::move(model)), constant_(constant) {
  if (!model_.faithful()) throw Error("UnitizedExtension: unitization model is not faithful");
}

Matrix UnitizedExtension::apply(const Matrix& x) const {
  const auto parts = model_.split(x);
  if (parts.residual > 1e-9 * std::max(1.0, x.norm()))
    throw Error("UnitizedExtension: input does not lie in the unitized subalgebra");
  const Index h = t_.out_dim();
  return t_.apply(parts.a) + parts.z * constant_ * Matrix::Identity(h, h);
}

Matrix UnitizedExtension::ampliate(const Matrix& x, Index n) const {
  const Index d = model_.ambient_dim();
  const Index h = t_.out_dim();
  if (x.rows() != n * d || x.cols() != n * d) throw DimensionError("UnitizedExtension::ampliate: shape mismatch");
  Matrix out(n * h, n * h);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out.block(i * h, j * h, h, h) = apply(x.block(i * d, j * d, d, d));
  return out;
}

UnitizedExtension unitized_extension(const SuperOperator& t, const UnitizedAlgebraModel& model, double tol) {
  return {t, model, cb_norm_cp(t, model, tol)};
}

SampledPositivity sampled_complete_positivity(const UnitizedExtension& ext, Index max_n, int samples, Rng& rng,
                                              double tol) {
  SampledPositivity out{true, std::numeric_limits<double>::infinity(), 0};
  for (Index n = 1; n <= max_n; ++n)
    for (int s = 0; s < samples; ++s) {
      // every fourth sample has no M-part, the adversarial direction for the constant
      const Matrix a = ext.model().random_positive_unitized(n, rng, s % 4 == 0);
      const Matrix image = ext.ampliate(a, n);
      out.min_margin = std::min(out.min_margin, min_eigenvalue(image));
      ++out.samples;
    }
  out.holds = out.min_margin >= -tol;
  return out;
}

}  // namespace phidec
