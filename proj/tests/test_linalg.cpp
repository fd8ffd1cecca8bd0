#include <doctest.h>

#include "oracles.hpp"
#include "phidec/linalg.hpp"

using namespace phidec;

TEST_CASE("vec is row-major and unvec inverts it") {
  Matrix a(2, 3);
  a << 1, 2, 3, 4, 5, 6;
  const Vector v = vec(a);
  for (Index i = 0; i < 6; ++i) CHECK(v(i) == cplx(double(i + 1)));
  CHECK(unvec(v, 2, 3) == a);
  CHECK_THROWS_AS(unvec(v, 4, 2), DimensionError);
}

TEST_CASE("kron matches the index formula") {
  Rng rng(1);
  const Matrix a = random_gaussian(2, 3, rng), b = random_gaussian(3, 2, rng);
  const Matrix k = kron(a, b);
  REQUIRE(k.rows() == 6);
  REQUIRE(k.cols() == 6);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 3; ++j)
      for (Index p = 0; p < 3; ++p)
        for (Index q = 0; q < 2; ++q) CHECK(std::abs(k(i * 3 + p, j * 2 + q) - a(i, j) * b(p, q)) < 1e-15);
}

TEST_CASE("partial transpose") {
  Rng rng(2);
  const Matrix x = random_gaussian(6, 6, rng);
  SUBCASE("outer side matches the first-factor oracle") {
    CHECK((partial_transpose(x, 2, 3, TransposeSide::outer) - oracle::partial_transpose_first(x, 2, 3)).norm() < 1e-14);
  }
  SUBCASE("both sides are involutions and compose to the full transpose") {
    const Matrix po = partial_transpose(x, 2, 3, TransposeSide::outer);
    const Matrix pi = partial_transpose(x, 2, 3, TransposeSide::inner);
    CHECK((partial_transpose(po, 2, 3, TransposeSide::outer) - x).norm() < 1e-14);
    CHECK((partial_transpose(pi, 2, 3, TransposeSide::inner) - x).norm() < 1e-14);
    CHECK((partial_transpose(po, 2, 3, TransposeSide::inner) - x.transpose()).norm() < 1e-14);
  }
  SUBCASE("swap and the maximally entangled projector are partial transposes of each other") {
    CHECK((partial_transpose(swap_operator(3), 3, 3, TransposeSide::outer) - max_entangled(3)).norm() < 1e-14);
    CHECK((swap_operator(3) - oracle::swap(3)).norm() == 0.0);
    CHECK((max_entangled(3) - oracle::omega(3)).norm() == 0.0);
  }
  SUBCASE("BlockMatrix overload agrees") {
    const BlockMatrix b(2, 3, x);
    CHECK((partial_transpose(b, TransposeSide::outer).flat() - partial_transpose(x, 2, 3, TransposeSide::outer)).norm() == 0.0);
  }
  CHECK_THROWS_AS(partial_transpose(x, 4, 2, TransposeSide::outer), DimensionError);
}

TEST_CASE("BlockMatrix blocks address the flat storage") {
  Rng rng(3);
  const Matrix x = random_gaussian(6, 6, rng);
  const BlockMatrix b(3, 2, x);
  CHECK(b.outer() == 3);
  CHECK(b.inner() == 2);
  CHECK(Matrix(b.block(1, 2)) == Matrix(x.block(2, 4, 2, 2)));
  CHECK(b.adjoint().flat() == x.adjoint());
  CHECK_THROWS_AS(BlockMatrix(4, 2, x), DimensionError);
}

TEST_CASE("hermitize symmetrizes tiny defects and rejects large ones") {
  Rng rng(4);
  Matrix h = random_hermitian(4, rng);
  Matrix nudged = h;
  nudged(0, 1) += 1e-13;
  CHECK(hermitian_defect(hermitize(nudged)) == doctest::Approx(0.0));
  nudged(0, 1) += 1e-3;
  try {
    hermitize(nudged);
    FAIL("expected NotHermitianError");
  } catch (const NotHermitianError& e) {
    CHECK(e.defect() == doctest::Approx(std::sqrt(2.0) * (1e-3 + 1e-13)).epsilon(1e-6));
  }
}

TEST_CASE("eigh is ascending and reconstructs") {
  Rng rng(5);
  const Matrix h = random_hermitian(5, rng);
  const auto e = eigh(h);
  for (Index i = 1; i < 5; ++i) CHECK(e.values(i - 1) <= e.values(i));
  CHECK((e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint() - h).norm() < 1e-12);
  CHECK(min_eigenvalue(h) == doctest::Approx(e.values(0)));
  const auto [lmin, v] = min_eigenpair(h);
  CHECK((h * v - lmin * v).norm() < 1e-12);
}

TEST_CASE("psd_project is the nearest PSD matrix") {
  Rng rng(6);
  const Matrix h = random_hermitian(4, rng);
  const Matrix p = psd_project(h);
  CHECK(oracle::min_eig(p) >= -1e-12);
  CHECK((psd_project(p) - p).norm() < 1e-12);
  // optimality: h - p is NSD and orthogonal to p
  CHECK(oracle::min_eig(p - h) >= -1e-12);
  CHECK(std::abs(oracle::hs(p, h - p)) < 1e-12);
}

TEST_CASE("null_space and operator_norm") {
  Matrix l(2, 4);
  l << 1, 0, 1, 0, 0, 1, 0, 1;
  const Matrix n = null_space(l, 1e-12);
  CHECK(n.cols() == 2);
  CHECK((l * n).norm() < 1e-12);
  CHECK((n.adjoint() * n - Matrix::Identity(2, 2)).norm() < 1e-12);
  CHECK(operator_norm(l) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("random ensembles") {
  Rng rng(7);
  const Matrix u = random_unitary(4, rng);
  CHECK((u.adjoint() * u - Matrix::Identity(4, 4)).norm() < 1e-12);
  const Matrix p = random_psd(5, rng, 2);
  CHECK(oracle::min_eig(p) >= -1e-12);
  CHECK(Eigen::JacobiSVD<Matrix>(p).setThreshold(1e-10).rank() == 2);
  CHECK(random_unit_vector(6, rng).norm() == doctest::Approx(1.0));
  CHECK(hermitian_defect(random_hermitian(3, rng)) == 0.0);
  Rng a(9), b(9);
  CHECK(random_gaussian(3, 3, a) == random_gaussian(3, 3, b));
}

TEST_CASE("matrix units") {
  const Matrix e = matrix_unit(3, 1, 2);
  CHECK(e(1, 2) == cplx(1.0));
  CHECK(e.norm() == 1.0);
}
