#include "phidec/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace phidec {

namespace {

double min_margin(const Matrix& a, const MapSequence& seq, Index n) {
  double m = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < seq.size(); ++k) m = std::min(m, min_eigenvalue(seq[k].ampliate(a, n)));
  return m;
}

// Pulls the margins up to zero by adding a multiple of the identity; valid when every
// phi_k is unital, since then (id_n (x) phi_k)(I) = I.
Matrix shift_into_cone(const Matrix& a, const MapSequence& seq, Index n) {
  const double m = min_margin(a, seq, n);
  if (m >= 0.0) return a;
  const double shift = -m * (1.0 + 1e-10) + 1e-15;
  return a + shift * Matrix::Identity(a.rows(), a.cols());
}

Matrix trace_normalized(const Matrix& a) { return a / a.trace().real(); }

Matrix rejection_candidate(Index dim, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Index rank = 1 + static_cast<Index>(unif(rng) * static_cast<double>(dim));
  Matrix p = random_psd(dim, rng, std::min(rank, dim));
  p /= p.trace().real();
  const double mix = unif(rng);
  return (1.0 - mix) * p + mix * Matrix::Identity(dim, dim) / static_cast<double>(dim);
}

}  // namespace

GammaMembership gamma_membership(const BlockMatrix& a, const MapSequence& seq, double tol) {
  if (a.inner() != seq.dim()) throw DimensionError("gamma_membership: block size differs from sequence dimension");
  const Matrix flat = hermitize(a.flat());
  GammaMembership out{true, {}};
  for (Index k = 0; k < seq.size(); ++k) {
    const double m = min_eigenvalue(seq[k].ampliate(flat, a.outer()));
    out.margins.push_back(m);
    if (m < -tol) out.member = false;
  }
  return out;
}

GammaProjection gamma_project(const Matrix& start, const MapSequence& seq, Index n, int max_iter, double tol) {
  if (!seq.all_hs_isometries()) throw Error("gamma_project: every phi_k must be a Hilbert-Schmidt isometry");
  const Index m = seq.size();
  std::vector<SuperOperator> inverses;
  for (const auto& e : seq.entries()) inverses.push_back(e.adjoint());

  Matrix x = hermitize(start);
  std::vector<Matrix> corrections(static_cast<size_t>(m), Matrix::Zero(x.rows(), x.cols()));
  for (int it = 1; it <= max_iter; ++it) {
    const Matrix prev = x;
    for (Index k = 0; k < m; ++k) {
      auto& p = corrections[static_cast<size_t>(k)];
      const Matrix z = x + p;
      Matrix y = inverses[static_cast<size_t>(k)].ampliate(psd_project(seq[k].ampliate(z, n)), n);
      y = 0.5 * (y + y.adjoint());
      p = z - y;
      x = y;
    }
    if (m == 1) return {x, it, true};
    if ((x - prev).norm() <= 1e-3 * tol * std::max(1.0, x.norm()) && min_margin(x, seq, n) >= -tol)
      return {x, it, true};
  }
  return {x, max_iter, min_margin(x, seq, n) >= -tol};
}

GammaSample gamma_sample(const MapSequence& seq, Index n, int max_iter, double tol, Rng& rng) {
  const Index dim = n * seq.dim();
  if (seq.all_hs_isometries()) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      const auto proj = gamma_project(random_hermitian(dim, rng), seq, n, max_iter, tol);
      Matrix a = proj.value;
      if (seq.all_unital()) a = shift_into_cone(a, seq, n);
      const double tr = a.trace().real();
      if (!(tr > 1e-10)) continue;
      a /= tr;
      BlockMatrix element(n, seq.dim(), a);
      if (gamma_membership(element, seq, tol).member) return {std::move(element), true, false, proj.iterations};
    }
    return {BlockMatrix(n, seq.dim()), false, false, max_iter};
  }
  for (int it = 1; it <= max_iter; ++it) {
    BlockMatrix element(n, seq.dim(), rejection_candidate(dim, rng));
    if (gamma_membership(element, seq, tol).member) return {std::move(element), true, true, it};
  }
  return {BlockMatrix(n, seq.dim()), false, true, max_iter};
}

ViolationCheck verify_violation(const SuperOperator& phi, const MapSequence& seq, const BlockMatrix& a,
                                const Vector& v, double membership_tol) {
  const auto membership = gamma_membership(a, seq, membership_tol);
  const double margin = *std::min_element(membership.margins.begin(), membership.margins.end());
  const Vector u = v / v.norm();
  const double value = (u.adjoint() * phi.ampliate(a.flat(), a.outer()) * u)(0).real();
  return {membership.member && value < -kViolationThreshold, margin, value};
}

ViolationReport criterion_violation_search(const SuperOperator& phi, const MapSequence& seq, Index n,
                                           int restarts, Rng& rng, const SearchOptions& options) {
  if (phi.in_dim() != seq.dim()) throw DimensionError("criterion_violation_search: dimension mismatch");
  const Index d = seq.dim();
  const bool projectable = seq.all_hs_isometries();
  const SuperOperator dual = phi.adjoint();

  auto value_of = [&](const Matrix& a) { return min_eigenpair(phi.ampliate(a, n)); };

  Matrix best_a;
  double best_value = std::numeric_limits<double>::infinity();

  for (int r = 0; r < restarts; ++r) {
    if (!projectable) {
      // rejection sampling only: keep the lowest value among sampled members
      for (int s = 0; s < options.steps_per_restart; ++s) {
        auto sample = gamma_sample(seq, n, 50, options.membership_tol, rng);
        if (!sample.found) continue;
        const double val = value_of(sample.element.flat()).first;
        if (val < best_value) {
          best_value = val;
          best_a = sample.element.flat();
        }
      }
      continue;
    }

    auto sample = gamma_sample(seq, n, options.projection_iterations, options.membership_tol, rng);
    if (!sample.found) continue;
    Matrix a = sample.element.flat();
    auto [val, v] = value_of(a);
    double step = 1.0;
    for (int it = 0; it < options.steps_per_restart; ++it) {
      const Matrix grad = dual.ampliate(v * v.adjoint(), n);
      bool accepted = false;
      while (step > 1e-8) {
        Matrix trial = gamma_project(a - step * grad, seq, n, options.projection_iterations).value;
        const double tr = trial.trace().real();
        if (tr > 1e-12) {
          trial /= tr;
          auto [tval, tv] = value_of(trial);
          if (tval < val - 1e-13) {
            a = trial;
            val = tval;
            v = tv;
            accepted = true;
            step *= 2.0;
            break;
          }
        }
        step *= 0.5;
      }
      if (!accepted) break;
    }
    if (val < best_value) {
      best_value = val;
      best_a = a;
    }
  }

  ViolationReport report{false, BlockMatrix(n, d), Vector(), best_value, !projectable};
  if (best_a.size() == 0) return report;

  Matrix candidate = best_a;
  if (seq.all_unital()) candidate = shift_into_cone(candidate, seq, n);
  candidate = trace_normalized(0.5 * (candidate + candidate.adjoint()));
  auto [value, v] = value_of(candidate);
  BlockMatrix element(n, d, candidate);
  const auto check = verify_violation(phi, seq, element, v, options.membership_tol);
  report.value = check.value;
  if (check.valid) {
    report.violation = true;
    report.a = std::move(element);
    report.v = v;
  }
  return report;
}

}  // namespace phidec
