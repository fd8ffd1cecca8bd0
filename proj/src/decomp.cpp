#include "phidec/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace phidec {

namespace {

std::vector<Matrix> split_blocks(const Vector& x, Index m, Index dim) {
  std::vector<Matrix> out;
  const Index n = dim * dim;
  for (Index k = 0; k < m; ++k) {
    Matrix b = unvec(Vector(x.segment(k * n, n)), dim, dim);
    out.push_back(0.5 * (b + b.adjoint()));
  }
  return out;
}

Vector project_blocks(const Vector& z, Index m, Index dim) {
  const Index n = dim * dim;
  Vector out(z.size());
  for (Index k = 0; k < m; ++k) {
    Matrix b = unvec(Vector(z.segment(k * n, n)), dim, dim);
    out.segment(k * n, n) = vec(psd_project(0.5 * (b + b.adjoint())));
  }
  return out;
}

double min_dual_margin(const Matrix& w, const FeasibilityProblem& prob) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : prob.precomps()) m = std::min(m, min_eigenvalue(adjoint_precomposition(p).apply(w)));
  return m;
}

Matrix unit_hermitian(const Matrix& w) {
  Matrix h = 0.5 * (w + w.adjoint());
  const double nrm = h.norm();
  return nrm > 0 ? Matrix(h / nrm) : h;
}

// Dual feasibility repair: when every P_k^*(I) is positive definite, adding a multiple
// of I lifts all dual margins without touching the separation direction much.
std::optional<Matrix> polish_witness(const Matrix& w, const FeasibilityProblem& prob) {
  const Index dim = prob.choi_dim();
  const double mu = min_dual_margin(Matrix::Identity(dim, dim), prob);
  if (!(mu > 1e-12)) return std::nullopt;
  const double deficit = -min_dual_margin(w, prob);
  if (deficit <= 0) return w;
  return unit_hermitian(w + (deficit / mu * (1.0 + 1e-6) + 1e-14) * Matrix::Identity(dim, dim));
}

std::optional<InfeasibilityWitness> try_witness(const Matrix& candidate, const FeasibilityProblem& prob) {
  const auto& opt = prob.options();
  std::vector<Matrix> attempts{unit_hermitian(candidate)};
  if (auto polished = polish_witness(attempts.front(), prob)) attempts.push_back(*polished);
  for (const auto& w : attempts) {
    const auto check = verify_witness(w, prob, opt.dual_tol, opt.pairing_tol);
    if (check.valid) return InfeasibilityWitness{w, -check.pairing};
  }
  return std::nullopt;
}

std::optional<DecompositionCertificate> refine_on_support(const DecompositionCertificate& cert,
                                                         const FeasibilityProblem& prob, double rel_cut) {
  const Index dim = prob.choi_dim();
  std::vector<EigenDecomposition> eigs;
  double scale = 0.0;
  for (const auto& x : cert.choi) {
    eigs.push_back(eigh(x));
    scale = std::max(scale, eigs.back().values.maxCoeff());
  }
  if (!(scale > 0)) return std::nullopt;

  std::vector<Matrix> supports;
  std::vector<Matrix> restricted;
  Index unknowns = 0;
  for (const auto& e : eigs) {
    Index r = 0;
    for (Index i = 0; i < e.values.size(); ++i)
      if (e.values(i) > rel_cut * scale) ++r;
    supports.push_back(e.vectors.rightCols(r));
    restricted.push_back(e.values.tail(r).cast<cplx>().asDiagonal());
    unknowns += r * r;
  }
  if (unknowns == 0) return std::nullopt;

  Matrix b(dim * dim, unknowns);
  std::vector<Matrix> xs;
  Index col = 0;
  for (size_t k = 0; k < supports.size(); ++k) {
    const Matrix& u = supports[k];
    for (Index a = 0; a < u.cols(); ++a)
      for (Index c = 0; c < u.cols(); ++c)
        b.col(col++) = vec(prob.precomps()[k].apply(u.col(a) * u.col(c).adjoint()));
    xs.push_back(u * restricted[k] * u.adjoint());
  }
  const Vector resid = vec(Matrix(prob.target().choi() - prob.reconstruct(xs)));
  const Vector delta = b.completeOrthogonalDecomposition().solve(resid);

  DecompositionCertificate out;
  col = 0;
  for (size_t k = 0; k < supports.size(); ++k) {
    const Index r = supports[k].cols();
    Matrix y = restricted[k] + unvec(Vector(delta.segment(col, r * r)), r, r);
    col += r * r;
    y = 0.5 * (y + y.adjoint());
    Matrix x = supports[k] * y * supports[k].adjoint();
    out.choi.push_back(0.5 * (x + x.adjoint()));
  }
  return out;
}

// Levenberg-Marquardt on X_k = L_k L_k^dagger with L_k of the numerical rank of X_k; the
// real Jacobian of the residual is assembled column by column
std::optional<DecompositionCertificate> refine_factors(const DecompositionCertificate& cert,
                                                      const FeasibilityProblem& prob, double rel_cut) {
  constexpr Index kMaxParameters = 800;
  const Index dim = prob.choi_dim();
  const Index n = dim * dim;
  double scale = 0.0;
  std::vector<EigenDecomposition> eigs;
  for (const auto& x : cert.choi) {
    eigs.push_back(eigh(x));
    scale = std::max(scale, eigs.back().values.maxCoeff());
  }
  if (!(scale > 0)) return std::nullopt;
  std::vector<Matrix> factors;
  Index params = 0;
  for (const auto& e : eigs) {
    Index r = 0;
    for (Index i = 0; i < e.values.size(); ++i)
      if (e.values(i) > rel_cut * scale) ++r;
    RealVector root = e.values.tail(r).cwiseSqrt();
    factors.push_back(e.vectors.rightCols(r) * root.cast<cplx>().asDiagonal());
    params += 2 * dim * r;
  }
  if (params == 0 || params > kMaxParameters) return std::nullopt;

  const Vector j = vec(prob.target().choi());
  auto residual = [&](const std::vector<Matrix>& ls) {
    Vector r = -j;
    for (size_t k = 0; k < ls.size(); ++k) r += prob.precomps()[k].op.matrix() * vec(Matrix(ls[k] * ls[k].adjoint()));
    return r;
  };
  auto realify = [](const Vector& v) {
    Eigen::VectorXd out(2 * v.size());
    out << v.real(), v.imag();
    return out;
  };

  const double target_norm = 1e-3 * prob.feasibility_tolerance();
  Vector r = residual(factors);
  double rnorm = r.norm();
  double mu = 1e-3;
  int stagnant = 0;
  for (int step = 0; step < 200 && rnorm > target_norm && stagnant < 8; ++step) {
    Eigen::MatrixXd jac(2 * n, params);
    Index col = 0;
    for (size_t k = 0; k < factors.size(); ++k) {
      const Matrix& p = prob.precomps()[k].op.matrix();
      const Matrix& l = factors[k];
      for (Index a = 0; a < dim; ++a)
        for (Index b = 0; b < l.cols(); ++b)
          for (const cplx unit : {cplx(1.0, 0.0), cplx(0.0, 1.0)}) {
            // d/dt of (L + t unit e_a e_b^T)(L + t unit e_a e_b^T)^dagger at t = 0
            Matrix delta = Matrix::Zero(dim, dim);
            delta.row(a) += unit * l.col(b).adjoint();
            delta.col(a) += std::conj(unit) * l.col(b);
            jac.col(col++) = realify(p * vec(delta));
          }
    }
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * realify(r);
    const double diag_scale = std::max(1e-300, normal.diagonal().maxCoeff());
    // Levenberg-Marquardt: shrink mu after a successful step, grow it after a rejected one
    bool improved = false;
    for (int attempt = 0; attempt < 12 && !improved; ++attempt) {
      Eigen::MatrixXd damped = normal;
      damped.diagonal().array() += mu * diag_scale;
      const Eigen::VectorXd dx = damped.ldlt().solve(grad);
      std::vector<Matrix> trial = factors;
      col = 0;
      for (auto& l : trial)
        for (Index a = 0; a < dim; ++a)
          for (Index b = 0; b < l.cols(); ++b) {
            l(a, b) -= cplx(dx(col), dx(col + 1));
            col += 2;
          }
      const Vector rt = residual(trial);
      if (rt.norm() < rnorm) {
        stagnant = rt.norm() < 0.9 * rnorm ? 0 : stagnant + 1;
        factors = std::move(trial);
        r = rt;
        rnorm = r.norm();
        mu = std::max(1e-15, mu / 10);
        improved = true;
      } else {
        mu *= 10;
      }
    }
    if (!improved) break;
  }
  DecompositionCertificate out;
  for (const auto& l : factors) out.choi.push_back(l * l.adjoint());
  return out;
}

}  // namespace

DecompositionCertificate refine_certificate(const DecompositionCertificate& cert, const FeasibilityProblem& prob) {
  DecompositionCertificate best = cert;
  auto base = verify_certificate(cert, prob, prob.options().psd_tol);
  double best_residual = base.valid ? base.residual : std::numeric_limits<double>::infinity();
  best.residual = base.residual;
  for (double cut : {1e-1, 1e-2, 1e-3, 1e-5, 1e-7, 1e-9}) {
    for (auto refined : {refine_on_support(cert, prob, cut), refine_factors(cert, prob, cut)}) {
      if (!refined) continue;
      const auto check = verify_certificate(*refined, prob, prob.options().psd_tol);
      if (check.valid && check.residual < best_residual) {
        best_residual = check.residual;
        best = std::move(*refined);
        best.residual = check.residual;
      }
    }
  }
  return best;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::feasible:
      return "feasible";
    case Verdict::infeasible:
      return "infeasible";
    case Verdict::undetermined:
      return "undetermined";
  }
  return "undetermined";
}

FeasibilityProblem::FeasibilityProblem(SuperOperator target, MapSequence seq, FeasibilityOptions options)
    : target_(std::move(target)), seq_(std::move(seq)), options_(options) {
  if (target_.in_dim() != seq_.dim()) throw DimensionError("FeasibilityProblem: target and sequence disagree on d");
  if (!target_.is_star_map()) throw NotHermitianError("FeasibilityProblem: target is not a *-map", target_.star_defect());
  if (!(options_.psd_tol >= 0) || !(options_.feas_rel_tol > 0) || options_.max_iter <= 0 || options_.stall_window <= 0)
    throw Error("FeasibilityProblem: invalid tolerances or budgets");
  for (const auto& e : seq_.entries()) precomps_.push_back(build_precomposition(e, target_.out_dim()));
}

double FeasibilityProblem::feasibility_tolerance() const {
  return options_.feas_rel_tol * std::max(1.0, target_.choi().norm());
}

Matrix FeasibilityProblem::reconstruct(const std::vector<Matrix>& xs) const {
  if (static_cast<Index>(xs.size()) != terms()) throw DimensionError("reconstruct: wrong number of Choi matrices");
  Matrix sum = Matrix::Zero(choi_dim(), choi_dim());
  for (size_t k = 0; k < xs.size(); ++k) sum += precomps_[k].apply(xs[k]);
  return sum;
}

FeasibilityResult feasibility(const FeasibilityProblem& prob) {
  const auto& opt = prob.options();
  const Index dim = prob.choi_dim();
  const Index n = dim * dim;
  const Index m = prob.terms();
  const Vector j = vec(prob.target().choi());
  const double tol_feas = prob.feasibility_tolerance();

  Matrix stacked(n, m * n);
  for (Index k = 0; k < m; ++k) stacked.middleCols(k * n, n) = prob.precomps()[static_cast<size_t>(k)].op.matrix();
  const Matrix stacked_adj = stacked.adjoint();

  // (M M^dagger)^+ once per problem; rank deficiency is expected when images of P_k overlap
  Matrix gram_pinv;
  {
    auto e = eigh(stacked * stacked_adj);
    const double cutoff = 1e-10 * std::max(1.0, e.values.maxCoeff());
    RealVector inv = RealVector::Zero(e.values.size());
    for (Index i = 0; i < inv.size(); ++i)
      if (e.values(i) > cutoff) inv(i) = 1.0 / e.values(i);
    gram_pinv = e.vectors * inv.cast<cplx>().asDiagonal() * e.vectors.adjoint();
  }

  FeasibilityResult res;
  const auto kernel = kernel_condition(prob.sequence(), prob.target(), opt.kernel_tol);
  res.kernel_condition_holds = kernel.holds;
  if (!kernel.holds) {
    // component of J(phi) orthogonal to every achievable Choi matrix
    const Vector perp = j - stacked * (stacked_adj * (gram_pinv * j));
    const Matrix w = -unvec(perp, dim, dim);
    if (auto wit = try_witness(w, prob)) {
      res.verdict = Verdict::infeasible;
      res.witness = std::move(wit);
      res.diagnostics = "kernel condition violated";
    } else {
      res.diagnostics = "kernel condition violated but separating witness failed verification";
    }
    return res;
  }

  auto accept = [&](DecompositionCertificate cert) {
    if (prob.sequence().kind() == SequenceKind::truncated_vanishing) {
      Matrix load = Matrix::Zero(prob.out_dim(), prob.out_dim());
      const Matrix id = Matrix::Identity(prob.in_dim(), prob.in_dim());
      for (const auto& c : cert.choi) load += SuperOperator::from_choi(prob.in_dim(), prob.out_dim(), c).apply(id);
      res.tail_slack = prob.sequence().tail_bound() * operator_norm(load);
    }
    res.verdict = Verdict::feasible;
    res.certificate = std::move(cert);
  };

  Vector x = Vector::Zero(m * n);
  Vector q = Vector::Zero(m * n);
  double last_checkpoint = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opt.max_iter; ++it) {
    res.iterations = it;
    const Vector r = stacked * x - j;
    if (r.norm() <= tol_feas) {
      DecompositionCertificate cert{split_blocks(x, m, dim), 0.0};
      const auto check = verify_certificate(cert, prob, opt.psd_tol);
      cert.residual = check.residual;
      if (check.valid) {
        accept(refine_certificate(cert, prob));
        return res;
      }
    }
    const Vector g = gram_pinv * r;
    const Vector step = stacked_adj * g;
    const double dist = step.norm();
    const Vector z = x - step + q;
    x = project_blocks(z, m, dim);
    q = z - x;

    if (it % opt.stall_window == 0) {
      res.distance_trace.push_back(dist);
      // slow convergence on the boundary of the cone: solve exactly on the current face
      DecompositionCertificate face = refine_certificate({split_blocks(x, m, dim), 0.0}, prob);
      if (verify_certificate(face, prob, opt.psd_tol).valid) {
        accept(std::move(face));
        return res;
      }
      if (dist > tol_feas) {
        if (auto wit = try_witness(unvec(g, dim, dim), prob)) {
          res.verdict = Verdict::infeasible;
          res.witness = std::move(wit);
          return res;
        }
      }
      if (last_checkpoint - dist < opt.stall_rel_decrease * last_checkpoint) {
        std::ostringstream os;
        os << "stalled at iteration " << it << " with distance " << dist;
        res.diagnostics = os.str();
        return res;
      }
      last_checkpoint = dist;
    }
  }
  std::ostringstream os;
  os << "iteration budget exhausted; last distance "
     << (res.distance_trace.empty() ? std::numeric_limits<double>::quiet_NaN() : res.distance_trace.back());
  res.diagnostics = os.str();
  return res;
}

CertificateCheck verify_certificate(const DecompositionCertificate& cert, const FeasibilityProblem& prob,
                                    double psd_tol) {
  CertificateCheck out{false, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  if (static_cast<Index>(cert.choi.size()) != prob.terms()) return out;
  for (const auto& x : cert.choi) {
    if (x.rows() != prob.choi_dim() || x.cols() != prob.choi_dim()) return out;
    try {
      out.min_eigenvalue = std::min(out.min_eigenvalue, min_eigenvalue(x));
    } catch (const NotHermitianError&) {
      return out;
    }
  }
  out.residual = (prob.reconstruct(cert.choi) - prob.target().choi()).norm();
  out.valid = out.min_eigenvalue >= -psd_tol && out.residual <= prob.feasibility_tolerance();
  return out;
}

WitnessCheck verify_witness(const Matrix& w, const FeasibilityProblem& prob, double dual_tol, double pairing_tol) {
  WitnessCheck out{false, std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  if (w.rows() != prob.choi_dim() || w.cols() != prob.choi_dim()) return out;
  Matrix h;
  try {
    h = hermitize(w);
  } catch (const NotHermitianError&) {
    return out;
  }
  const double nrm = h.norm();
  if (!(nrm > 0)) return out;
  h /= nrm;
  out.pairing = hs_inner(h, prob.target().choi()).real();
  out.min_dual_margin = min_dual_margin(h, prob);
  out.valid = out.pairing <= -pairing_tol && out.min_dual_margin >= -dual_tol;
  return out;
}

DecompositionCertificate conic_combine(const DecompositionCertificate& a, const DecompositionCertificate& b,
                                       double lambda1, double lambda2) {
  if (!(lambda1 > 0) || !(lambda2 > 0)) throw Error("conic_combine: weights must be positive");
  if (a.choi.size() != b.choi.size()) throw DimensionError("conic_combine: certificates have different lengths");
  DecompositionCertificate out;
  for (size_t k = 0; k < a.choi.size(); ++k) {
    if (a.choi[k].rows() != b.choi[k].rows()) throw DimensionError("conic_combine: Choi shapes differ");
    out.choi.push_back(lambda1 * a.choi[k] + lambda2 * b.choi[k]);
  }
  out.residual = lambda1 * a.residual + lambda2 * b.residual;
  return out;
}

DecompositionCertificate left_compose(const DecompositionCertificate& cert, const SuperOperator& psi, double tol) {
  if (!is_cp(psi, tol).holds) throw Error("left_compose: psi is not completely positive");
  DecompositionCertificate out;
  for (const auto& x : cert.choi) {
    if (x.rows() % psi.in_dim() != 0) throw DimensionError("left_compose: psi input dimension does not divide Choi size");
    out.choi.push_back(psi.ampliate(x, x.rows() / psi.in_dim()));
  }
  out.residual = cert.residual * operator_norm(psi.coeffs());
  return out;
}

ClosednessProbe closedness_probe(const FeasibilityProblem& limit, const std::vector<SuperOperator>& members) {
  ClosednessProbe out{false, Verdict::undetermined, {}};
  for (const auto& phi : members)
    out.member_verdicts.push_back(feasibility(FeasibilityProblem(phi, limit.sequence(), limit.options())).verdict);
  out.limit_verdict = feasibility(limit).verdict;
  out.passed = out.limit_verdict != Verdict::infeasible;
  return out;
}

}  // namespace phidec
