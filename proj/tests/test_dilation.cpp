#include <doctest.h>

#include "oracles.hpp"
#include "phidec/dilation.hpp"

using namespace phidec;

namespace {

SuperOperator pinching(Index d) {
  return SuperOperator::from_function(d, d, [](const Matrix& a) { return Matrix(a.diagonal().asDiagonal()); });
}

// [a_k^(ij)] with the k-th d x d diagonal block of every entry, by index arithmetic
Matrix oracle_eta(const Matrix& x, Index n, Index m, Index d, Index k) {
  Matrix out(n * d, n * d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index p = 0; p < d; ++p)
        for (Index q = 0; q < d; ++q) out(i * d + p, j * d + q) = x(i * m * d + k * d + p, j * m * d + k * d + q);
  return out;
}

// element of M_n(D) with D = block diagonal m blocks of size d
Matrix random_block_diagonal_entries(Index n, Index m, Index d, Rng& rng) {
  Matrix x = Matrix::Zero(n * m * d, n * m * d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < m; ++k) x.block(i * m * d + k * d, j * m * d + k * d, d, d) = random_gaussian(d, d, rng);
  return x;
}

}  // namespace

TEST_CASE("Stinespring data reconstructs a CP map") {
  Rng rng(71);
  const auto psi = SuperOperator::kraus({random_gaussian(3, 2, rng), random_gaussian(3, 2, rng)});
  const auto s = stinespring(psi);
  CHECK(s.rank == 2);
  CHECK(s.dilation_dim() == 4);
  for (int t = 0; t < 5; ++t) {
    const Matrix a = random_gaussian(2, 2, rng), b = random_gaussian(2, 2, rng);
    CHECK((s.reconstruct(a) - psi.apply(a)).norm() < 1e-10);
    // pi is a unital *-homomorphism
    CHECK((s.pi(a * b) - s.pi(a) * s.pi(b)).norm() < 1e-12);
    CHECK((s.pi(a.adjoint()) - s.pi(a).adjoint()).norm() < 1e-12);
  }
  CHECK((s.pi(Matrix::Identity(2, 2)) - Matrix::Identity(4, 4)).norm() < 1e-14);
  CHECK_THROWS_AS(stinespring(SuperOperator::transpose(2)), Error);
}

TEST_CASE("block dilation of the transpose and the identity") {
  SUBCASE("transpose through (id, t)") {
    const FeasibilityProblem prob(SuperOperator::transpose(2), canonical("decomposable", 2));
    const auto res = feasibility(prob);
    REQUIRE(res.certificate);
    const auto dil = block_dilation(*res.certificate, prob);
    Rng rng(72);
    for (int t = 0; t < 10; ++t) {
      const Matrix a = random_gaussian(2, 2, rng);
      CHECK((dil.reconstruct(a) - a.transpose()).norm() <= 1e-9);
    }
    Matrix sum = Matrix::Zero(dil.dim, dil.dim);
    for (Index k = 0; k < static_cast<Index>(dil.parts.size()); ++k) {
      const Matrix p = dil.projection(k);
      CHECK((p * p - p).norm() < 1e-14);
      for (Index l = k + 1; l < static_cast<Index>(dil.parts.size()); ++l) CHECK((p * dil.projection(l)).norm() == 0.0);
      sum += p;
    }
    CHECK((sum - Matrix::Identity(dil.dim, dil.dim)).norm() == 0.0);
  }
  SUBCASE("identity through (id)") {
    const FeasibilityProblem prob(SuperOperator::identity(3), canonical("cp", 3));
    const DecompositionCertificate cert{{oracle::omega(3)}, 0.0};
    const auto dil = block_dilation(cert, prob);
    Rng rng(73);
    const Matrix a = random_gaussian(3, 3, rng);
    CHECK((dil.reconstruct(a) - a).norm() < 1e-13);
    // rho is a *-homomorphism for a tuple of homomorphisms
    const Matrix b = random_gaussian(3, 3, rng);
    CHECK((dil.rho(a * b) - dil.rho(a) * dil.rho(b)).norm() < 1e-12);
  }
  SUBCASE("an invalid certificate is refused") {
    const FeasibilityProblem prob(SuperOperator::identity(2), canonical("cp", 2));
    CHECK_THROWS_AS(block_dilation({{oracle::swap(2)}, 0.0}, prob), Error);
  }
}

TEST_CASE("eta reshuffles entries and is multiplicative") {
  Rng rng(74);
  for (int t = 0; t < 10; ++t) {
    const Index n = 1 + t % 3, m = 2, d = 2;
    const Matrix x = random_block_diagonal_entries(n, m, d, rng);
    const Matrix y = random_block_diagonal_entries(n, m, d, rng);
    const auto ex = eta_reshuffle(x, n, m, d), ey = eta_reshuffle(y, n, m, d), exy = eta_reshuffle(x * y, n, m, d);
    REQUIRE(ex.size() == 2);
    for (Index k = 0; k < m; ++k) {
      CHECK((ex[k] - oracle_eta(x, n, m, d, k)).norm() == 0.0);
      CHECK((exy[k] - ex[k] * ey[k]).norm() <= 1e-12);
    }
    CHECK((direct_sum(exy) - direct_sum(ex) * direct_sum(ey)).norm() <= 1e-12);
  }
  Matrix off = random_block_diagonal_entries(2, 2, 2, rng);
  off(0, 2) = 1.0;
  CHECK_THROWS_AS(eta_reshuffle(off, 2, 2, 2), Error);
  CHECK_THROWS_AS(eta_reshuffle(Matrix::Zero(5, 5), 2, 2, 2), DimensionError);
}

TEST_CASE("Phi is defined on span xi(M_d)") {
  Rng rng(75);
  SUBCASE("injective tuple") {
    const auto seq = canonical("decomposable", 2);
    const auto phi = SuperOperator::from_function(2, 2, [](const Matrix& a) { return Matrix(a + 2.0 * a.transpose()); });
    const auto f = build_phi(phi, seq);
    for (int t = 0; t < 5; ++t) {
      const Matrix a = random_gaussian(2, 2, rng);
      const Matrix x = xi_embed(a, seq).value.flat();
      CHECK((f.apply(x) - phi.apply(a)).norm() <= 1e-10);
      CHECK((f.preimage(x) - a).norm() <= 1e-10);
      CHECK(f.span_residual(x) < 1e-12);
    }
    // an off-span block diagonal element is detected
    Matrix z = Matrix::Zero(4, 4);
    z(0, 1) = 1.0;
    CHECK(f.span_residual(z) > 0.1);
  }
  SUBCASE("preimage independence through the pinching") {
    const auto seq = MapSequence::finite({pinching(3)});
    const Matrix k = random_gaussian(2, 3, rng);
    const auto phi = SuperOperator::from_function(
        3, 2, [&](const Matrix& a) { return Matrix(k * Matrix(a.diagonal().asDiagonal()) * k.adjoint()); });
    const auto f = build_phi(phi, seq);
    for (int t = 0; t < 5; ++t) {
      const Matrix a = random_gaussian(3, 3, rng);
      Matrix shifted = a;
      shifted(0, 2) += 5.0;  // kernel direction
      const Matrix x = xi_embed(shifted, seq).value.flat();
      CHECK((f.apply(x) - phi.apply(a)).norm() <= 1e-8);
      CHECK((f.apply(x) - phi.apply(shifted)).norm() <= 1e-8);
    }
    CHECK_THROWS_AS(build_phi(SuperOperator::identity(3), seq), Error);
  }
  SUBCASE("ampliation is entrywise") {
    const auto seq = canonical("decomposable", 2);
    const auto phi = SuperOperator::transpose(2);
    const auto f = build_phi(phi, seq);
    const Index n = 2;
    Matrix x = Matrix::Zero(n * 4, n * 4);
    Matrix expected(n * 2, n * 2);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        const Matrix a = random_gaussian(2, 2, rng);
        x.block(i * 4, j * 4, 4, 4) = xi_embed(a, seq).value.flat();
        expected.block(i * 2, j * 2, 2, 2) = a.transpose();
      }
    CHECK((f.ampliate(x, n) - expected).norm() <= 1e-10);
  }
}

TEST_CASE("unitization model") {
  const UnitizedAlgebraModel model(3, {2});
  CHECK(model.faithful());
  CHECK(model.basis().size() == 4);
  Matrix p = Matrix::Zero(3, 3);
  p(0, 0) = p(1, 1) = 1.0;
  CHECK((model.unit() - p).norm() == 0.0);
  Rng rng(76);
  Matrix a = Matrix::Zero(3, 3);
  a.topLeftCorner(2, 2) = random_gaussian(2, 2, rng);
  const auto s = model.split(a + cplx(0.7, -0.2) * Matrix::Identity(3, 3));
  CHECK((s.a - a).norm() < 1e-12);
  CHECK(std::abs(s.z - cplx(0.7, -0.2)) < 1e-12);
  CHECK(s.residual < 1e-12);
  CHECK(model.split(Matrix::Ones(3, 3)).residual > 0.1);
  CHECK_THROWS_AS(UnitizedAlgebraModel(3, {3}), Error);
  CHECK_THROWS_AS(UnitizedAlgebraModel(3, {2, 2}), DimensionError);
  for (Index n = 1; n <= 3; ++n) {
    CHECK(oracle::min_eig(model.random_positive(n, rng)) >= -1e-12);
    CHECK(oracle::min_eig(model.random_positive_unitized(n, rng)) >= -1e-12);
  }
}

TEST_CASE("unitized extension of a CP map") {
  Rng rng(77);
  const UnitizedAlgebraModel model(4, {1, 2});
  const auto t = SuperOperator::kraus({random_gaussian(2, 4, rng), random_gaussian(2, 4, rng)});
  const double cb = cb_norm_cp(t, model);
  CHECK(cb == doctest::Approx(oracle::min_eig(-t.apply(model.unit())) * -1.0));
  const auto ext = unitized_extension(t, model);
  CHECK(ext.constant() == doctest::Approx(cb));
  // T~ extends T and sends I to ||T||_cb I
  Matrix a = Matrix::Zero(4, 4);
  a(0, 0) = 1.0;
  CHECK((ext.apply(a) - t.apply(a)).norm() < 1e-12);
  CHECK((ext.apply(Matrix::Identity(4, 4)) - cb * Matrix::Identity(2, 2)).norm() < 1e-12);
  const auto ok = sampled_complete_positivity(ext, 3, 40, rng);
  CHECK(ok.holds);
  CHECK(ok.samples == 120);
  CHECK(ok.min_margin >= -1e-9);
  // halving the constant breaks positivity on I - p
  const UnitizedExtension halved(t, model, 0.5 * cb);
  const Matrix i_minus_p = Matrix::Identity(4, 4) - model.unit();
  CHECK(oracle::min_eig(halved.apply(i_minus_p)) < -1e-3);
  CHECK_FALSE(sampled_complete_positivity(halved, 2, 20, rng).holds);
  CHECK_THROWS_AS(ext.apply(Matrix::Ones(4, 4)), Error);
  CHECK_THROWS_AS(cb_norm_cp(SuperOperator::transpose(4), model), Error);
}
