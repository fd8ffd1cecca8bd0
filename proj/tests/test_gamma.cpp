#include <doctest.h>

#include "oracles.hpp"
#include "phidec/gamma.hpp"

using namespace phidec;

TEST_CASE("membership of the maximally entangled block matrix") {
  // [E_ij]_ij = |Omega><Omega| is PSD, but its blockwise transpose is the swap
  const BlockMatrix omega(2, 2, max_entangled(2));
  const auto cp = gamma_membership(omega, canonical("cp", 2));
  CHECK(cp.member);
  CHECK(cp.margins[0] == doctest::Approx(0.0));
  const auto dec = gamma_membership(omega, canonical("decomposable", 2));
  CHECK_FALSE(dec.member);
  CHECK(dec.margins[1] == doctest::Approx(-1.0));
  CHECK_THROWS_AS(gamma_membership(BlockMatrix(2, 3), canonical("cp", 2)), DimensionError);
}

TEST_CASE("projection lands in the cone") {
  Rng rng(41);
  const auto seq = canonical("decomposable", 2);
  const Matrix start = random_hermitian(4, rng);
  const auto p = gamma_project(start, seq, 2, 2000, 1e-10);
  CHECK(p.converged);
  const auto m = gamma_membership(BlockMatrix(2, 2, p.value), seq);
  CHECK(m.member);
  // both PSD and PPT by the oracle
  CHECK(oracle::min_eig(p.value) >= -1e-8);
  CHECK(oracle::min_eig(oracle::partial_transpose_first(p.value, 2, 2).transpose()) >= -1e-8);
  CHECK_THROWS_AS(gamma_project(start, geometric_identity_sequence(2, 3), 2, 100), Error);
}

TEST_CASE("sampling") {
  Rng rng(42);
  SUBCASE("isometric sequences use projection") {
    const auto s = gamma_sample(canonical("decomposable", 3), 2, 400, 1e-10, rng);
    REQUIRE(s.found);
    CHECK_FALSE(s.used_rejection);
    CHECK(s.element.flat().trace().real() == doctest::Approx(1.0));
    CHECK(gamma_membership(s.element, canonical("decomposable", 3)).member);
  }
  SUBCASE("non-isometric sequences fall back to rejection") {
    const auto seq = geometric_identity_sequence(2, 3);
    const auto s = gamma_sample(seq, 2, 400, 1e-10, rng);
    CHECK(s.used_rejection);
    if (s.found) CHECK(gamma_membership(s.element, seq).member);
  }
  SUBCASE("samples are seeded") {
    Rng a(5), b(5);
    CHECK(gamma_sample(canonical("cp", 2), 2, 100, 1e-10, a).element.flat() ==
          gamma_sample(canonical("cp", 2), 2, 100, 1e-10, b).element.flat());
  }
}

TEST_CASE("forward direction: members of the cone map to PSD block matrices") {
  Rng rng(43);
  const auto seq = canonical("decomposable", 2);
  // phi = psi_1 + psi_2 o t with CP psi_k
  const Matrix k1 = random_gaussian(3, 2, rng), k2 = random_gaussian(3, 2, rng);
  const oracle::Map phi = [&](const oracle::M& x) {
    return oracle::M(k1 * x * k1.adjoint() + k2 * x.transpose() * k2.adjoint());
  };
  for (Index n = 1; n <= 3; ++n)
    for (int t = 0; t < 10; ++t) {
      const auto s = gamma_sample(seq, n, 400, 1e-10, rng);
      REQUIRE(s.found);
      CHECK(oracle::min_eig(oracle::ampliate(phi, s.element.flat(), n, 2, 3)) >= -1e-6);
    }
}

TEST_CASE("violation search on the transpose with the identity tuple") {
  Rng rng(44);
  const auto rep = criterion_violation_search(SuperOperator::transpose(2), canonical("cp", 2), 2, 4, rng);
  REQUIRE(rep.violation);
  CHECK(rep.value <= -0.49);
  // independent re-check: A PSD and <v, (id (x) t)(A) v> = value
  CHECK(oracle::min_eig(rep.a.flat()) >= -1e-8);
  const oracle::M image = oracle::ampliate(oracle::transpose_map, rep.a.flat(), 2, 2, 2);
  CHECK((rep.v.adjoint() * image * rep.v)(0, 0).real() == doctest::Approx(rep.value).epsilon(1e-6));
  const auto check = verify_violation(SuperOperator::transpose(2), canonical("cp", 2), rep.a, rep.v);
  CHECK(check.valid);
}

TEST_CASE("no violation for CP maps") {
  Rng rng(45);
  const auto phi = SuperOperator::conjugation(random_gaussian(3, 2, rng));
  const auto rep = criterion_violation_search(phi, canonical("cp", 2), 2, 4, rng);
  CHECK_FALSE(rep.violation);
  CHECK(rep.value >= -1e-8);
}

TEST_CASE("verify_violation rejects tampered reports") {
  Rng rng(46);
  const auto rep = criterion_violation_search(SuperOperator::transpose(2), canonical("cp", 2), 2, 2, rng);
  REQUIRE(rep.violation);
  // the same witness is not a violation once t is in the tuple
  CHECK_FALSE(verify_violation(SuperOperator::transpose(2), canonical("decomposable", 2), rep.a, rep.v).valid);
  // a non-member A is rejected
  BlockMatrix bad = rep.a;
  bad.flat() = -bad.flat();
  CHECK_FALSE(verify_violation(SuperOperator::transpose(2), canonical("cp", 2), bad, rep.v).valid);
}
