#include <doctest.h>

#include "oracles.hpp"
#include "phidec/superop.hpp"

using namespace phidec;

namespace {

SuperOperator random_map(Index d, Index h, Rng& rng) { return SuperOperator(d, h, random_gaussian(h * h, d * d, rng)); }

}  // namespace

TEST_CASE("Choi matrices of the standard maps") {
  CHECK((SuperOperator::identity(3).choi() - oracle::omega(3)).norm() == 0.0);
  CHECK((SuperOperator::transpose(3).choi() - oracle::swap(3)).norm() == 0.0);
  CHECK(SuperOperator::zero(2, 3).choi().norm() == 0.0);
  const auto tr = SuperOperator::trace_replace(2, 3, 0.5);
  CHECK((tr.apply(Matrix::Identity(2, 2)) - Matrix::Identity(3, 3)).norm() < 1e-15);
}

TEST_CASE("apply, from_function and from_choi agree with the oracle") {
  Rng rng(11);
  const Matrix k1 = random_gaussian(3, 2, rng), k2 = random_gaussian(3, 2, rng);
  const oracle::Map f = [&](const oracle::M& x) { return oracle::M(k1 * x * k1.adjoint() + k2 * x.transpose() * k2.adjoint()); };
  const auto phi = SuperOperator::from_function(2, 3, f);
  CHECK((phi.choi() - oracle::choi(f, 2, 3)).norm() < 1e-13);
  const auto back = SuperOperator::from_choi(2, 3, phi.choi());
  CHECK((back.coeffs() - phi.coeffs()).norm() < 1e-14);
  for (int t = 0; t < 5; ++t) {
    const Matrix a = random_gaussian(2, 2, rng);
    CHECK((phi.apply(a) - f(a)).norm() < 1e-12);
    CHECK((phi.apply(a) - oracle::apply_choi(phi.choi(), 2, 3, a)).norm() < 1e-12);
  }
  CHECK_THROWS_AS(phi.apply(Matrix::Zero(3, 3)), DimensionError);
  CHECK_THROWS_AS(SuperOperator::from_choi(2, 3, Matrix::Zero(5, 5)), DimensionError);
}

TEST_CASE("Kraus and conjugation constructors") {
  Rng rng(12);
  const Matrix k = random_gaussian(3, 2, rng);
  const Matrix a = random_gaussian(2, 2, rng);
  CHECK((SuperOperator::conjugation(k).apply(a) - k * a * k.adjoint()).norm() < 1e-13);
  const Matrix k2 = random_gaussian(3, 2, rng);
  CHECK((SuperOperator::kraus({k, k2}).apply(a) - (k * a * k.adjoint() + k2 * a * k2.adjoint())).norm() < 1e-13);
}

TEST_CASE("composition matches the brute-force oracle") {
  Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    const auto phi = random_map(2, 3, rng);
    const auto psi = random_map(3, 2, rng);
    const auto oracle_choi =
        oracle::choi([&](const oracle::M& x) { return psi.apply(oracle::apply_choi(phi.choi(), 2, 3, x)); }, 2, 2);
    CHECK((compose(psi, phi).choi() - oracle_choi).norm() < 1e-12);
  }
  CHECK_THROWS_AS(compose(random_map(2, 2, rng), random_map(2, 3, rng)), DimensionError);
}

TEST_CASE("ampliation acts block-wise") {
  Rng rng(14);
  const auto phi = random_map(2, 3, rng);
  const Matrix a = random_gaussian(6, 6, rng);
  const auto expected = oracle::ampliate(oracle::as_map(phi.choi(), 2, 3), a, 3, 2, 3);
  CHECK((phi.ampliate(a, 3) - expected).norm() < 1e-12);
}

TEST_CASE("Hilbert-Schmidt adjoint") {
  Rng rng(15);
  const auto phi = random_map(2, 3, rng);
  const Matrix a = random_gaussian(2, 2, rng), b = random_gaussian(3, 3, rng);
  CHECK(std::abs(hs_inner(b, phi.apply(a)) - hs_inner(phi.adjoint().apply(b), a)) < 1e-12);
}

TEST_CASE("linear combinations") {
  Rng rng(16);
  const auto a = random_map(2, 2, rng), b = random_map(2, 2, rng);
  const Matrix x = random_gaussian(2, 2, rng);
  CHECK(((a + b).apply(x) - a.apply(x) - b.apply(x)).norm() < 1e-13);
  CHECK(((a - b).apply(x) - a.apply(x) + b.apply(x)).norm() < 1e-13);
  CHECK(((cplx(2.0) * a).apply(x) - 2.0 * a.apply(x)).norm() < 1e-13);
  CHECK_THROWS_AS(a + random_map(2, 3, rng), DimensionError);
}

TEST_CASE("spectral predicates") {
  SUBCASE("identity is CP and not co-CP, transpose the other way round") {
    CHECK(is_cp(SuperOperator::identity(2)).holds);
    CHECK_FALSE(is_ccp(SuperOperator::identity(2)).holds);
    CHECK_FALSE(is_cp(SuperOperator::transpose(2)).holds);
    CHECK(is_ccp(SuperOperator::transpose(2)).holds);
    CHECK(is_cp(SuperOperator::transpose(2)).margin == doctest::Approx(-1.0));
  }
  SUBCASE("the Choi map is neither") {
    const auto c = SuperOperator::from_function(3, 3, oracle::choi_map);
    CHECK_FALSE(is_cp(c).holds);
    CHECK_FALSE(is_ccp(c).holds);
  }
  SUBCASE("non-*-maps are rejected") {
    Matrix coeffs = Matrix::Zero(4, 4);
    coeffs(1, 0) = 1.0;  // E_00 -> E_01
    const SuperOperator bad(2, 2, coeffs);
    CHECK_FALSE(bad.is_star_map());
    CHECK(bad.star_defect() > 0.5);
    CHECK_THROWS_AS(is_cp(bad), NotHermitianError);
  }
}

TEST_CASE("algebraic predicates") {
  Rng rng(17);
  const auto u = SuperOperator::conjugation(random_unitary(3, rng));
  CHECK(is_unital(u));
  CHECK(is_homomorphism(u));
  CHECK(is_hs_isometry(u));
  CHECK(is_unital(SuperOperator::transpose(3)));
  CHECK_FALSE(is_homomorphism(SuperOperator::transpose(3)));
  CHECK(is_hs_isometry(SuperOperator::transpose(3)));
  const auto half = SuperOperator::identity(2) * cplx(0.5);
  CHECK_FALSE(is_unital(half));
  CHECK_FALSE(is_hs_isometry(half));
  CHECK_FALSE(is_unital(SuperOperator::zero(2, 3)));
}

TEST_CASE("norm estimates") {
  Rng rng(18);
  const auto n = estimate_norm(SuperOperator::identity(3) * cplx(0.25));
  CHECK(n.estimate == doctest::Approx(0.25));
  const auto phi = random_map(3, 2, rng);
  const auto e = estimate_norm(phi);
  CHECK(e.estimate <= e.hs_upper_bound + 1e-12);
  CHECK(e.estimate == doctest::Approx(Eigen::JacobiSVD<Matrix>(phi.coeffs()).singularValues()(0)).epsilon(1e-6));
}

TEST_CASE("positivity heuristic") {
  Rng rng(19);
  SUBCASE("finds a counterexample for a non-positive map") {
    const auto neg = SuperOperator::identity(2) - SuperOperator::trace_replace(2, 2, 0.2);
    const auto ev = is_positive_heuristic(neg, 50, 4, rng);
    REQUIRE(ev.counterexample);
    const Matrix out = neg.apply(ev.u * ev.u.adjoint());
    CHECK((ev.v.adjoint() * out * ev.v)(0, 0).real() == doctest::Approx(ev.min_value));
    CHECK(ev.min_value < -0.1);
  }
  SUBCASE("no counterexample for the transpose or the Choi map") {
    CHECK_FALSE(is_positive_heuristic(SuperOperator::transpose(3), 50, 4, rng).counterexample);
    const auto ev = is_positive_heuristic(SuperOperator::from_function(3, 3, oracle::choi_map), 100, 8, rng);
    CHECK_FALSE(ev.counterexample);
    CHECK(ev.min_value > -1e-8);
  }
}

TEST_CASE("precomposition operator reproduces J(psi o phi_k)") {
  Rng rng(20);
  for (int t = 0; t < 100; ++t) {
    const Index d = 2 + t % 2, h = 2 + (t / 2) % 3;
    const auto phi_k = random_map(d, d, rng);
    const auto psi = random_map(d, h, rng);
    const auto p = build_precomposition(phi_k, h);
    const auto oracle_choi = oracle::choi(
        [&](const oracle::M& x) { return oracle::apply_choi(psi.choi(), d, h, oracle::apply_choi(phi_k.choi(), d, d, x)); },
        d, h);
    CHECK((p.apply(psi.choi()) - oracle_choi).norm() <= 1e-10);
  }
}

TEST_CASE("precomposition is contravariant and its adjoint is the HS adjoint") {
  Rng rng(21);
  const auto a = random_map(2, 2, rng), b = random_map(2, 2, rng);
  const auto pa = build_precomposition(a, 3), pb = build_precomposition(b, 3);
  const auto pab = build_precomposition(compose(a, b), 3);
  const Matrix x = random_gaussian(6, 6, rng), y = random_gaussian(6, 6, rng);
  CHECK((pab.apply(x) - pb.apply(pa.apply(x))).norm() < 1e-11);
  CHECK(std::abs(hs_inner(y, pa.apply(x)) - hs_inner(adjoint_precomposition(pa).apply(y), x)) < 1e-11);
  CHECK((build_precomposition(SuperOperator::transpose(2), 3).apply(x) - oracle::partial_transpose_first(x, 2, 3)).norm() < 1e-14);
  CHECK_THROWS_AS(build_precomposition(random_map(2, 3, rng), 2), DimensionError);
}
