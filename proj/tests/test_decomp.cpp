#include <doctest.h>

#include "oracles.hpp"
#include "phidec/decomp.hpp"

using namespace phidec;

namespace {

SuperOperator choi_map() { return SuperOperator::from_function(3, 3, oracle::choi_map); }

SuperOperator pinching(Index d) {
  return SuperOperator::from_function(d, d, [](const Matrix& a) { return Matrix(a.diagonal().asDiagonal()); });
}

// psi_1 + psi_2 o t with random Kraus operators
SuperOperator random_decomposable(Index d, Index h, Rng& rng) {
  const Matrix k1 = random_gaussian(h, d, rng), k2 = random_gaussian(h, d, rng);
  return SuperOperator::from_function(
      d, h, [&](const Matrix& x) { return Matrix(k1 * x * k1.adjoint() + k2 * x.transpose() * k2.adjoint()); });
}

}  // namespace

TEST_CASE("the transpose decomposes as 0 + id o t") {
  const FeasibilityProblem prob(SuperOperator::transpose(2), canonical("decomposable", 2));
  const auto res = feasibility(prob);
  REQUIRE(res.verdict == Verdict::feasible);
  REQUIRE(res.certificate);
  const auto& xs = res.certificate->choi;
  CHECK(xs[0].norm() < 1e-7);
  CHECK((xs[1] - oracle::omega(2)).norm() < 1e-7);
  // reconstruct with the oracle: X1 + PT_first(X2) = J(t)
  const Matrix sum = xs[0] + oracle::partial_transpose_first(xs[1], 2, 2);
  CHECK((sum - oracle::swap(2)).norm() <= 1e-7);
  CHECK(verify_certificate(*res.certificate, prob).valid);
  CHECK_FALSE(res.witness);
}

TEST_CASE("the Choi map admits a separating witness") {
  const FeasibilityProblem prob(choi_map(), canonical("decomposable", 3));
  const auto res = feasibility(prob);
  REQUIRE(res.verdict == Verdict::infeasible);
  REQUIRE(res.witness);
  CHECK_FALSE(res.certificate);
  const Matrix& w = res.witness->w;
  CHECK(w.norm() == doctest::Approx(1.0));
  // dual feasibility for (id, t): W and PT_first(W) are PSD
  CHECK(oracle::min_eig(w) >= -1e-9);
  CHECK(oracle::min_eig(oracle::partial_transpose_first(w, 3, 3)) >= -1e-9);
  const double pairing = oracle::hs(w, oracle::choi(oracle::choi_map, 3, 3));
  CHECK(pairing < -1e-6);
  CHECK(res.witness->gap == doctest::Approx(-pairing).epsilon(1e-9));
  CHECK(verify_witness(w, prob).valid);
}

TEST_CASE("kernel condition failure is infeasible") {
  const FeasibilityProblem prob(SuperOperator::identity(3), MapSequence::finite({pinching(3)}));
  const auto res = feasibility(prob);
  CHECK(res.verdict == Verdict::infeasible);
  CHECK_FALSE(res.kernel_condition_holds);
  CHECK_FALSE(res.certificate);
}

TEST_CASE("problem construction errors") {
  CHECK_THROWS_AS(FeasibilityProblem(SuperOperator::identity(3), canonical("cp", 2)), DimensionError);
  Matrix coeffs = Matrix::Zero(4, 4);
  coeffs(1, 0) = 1.0;
  CHECK_THROWS_AS(FeasibilityProblem(SuperOperator(2, 2, coeffs), canonical("cp", 2)), NotHermitianError);
  FeasibilityOptions bad;
  bad.feas_rel_tol = -1.0;
  CHECK_THROWS_AS(FeasibilityProblem(SuperOperator::identity(2), canonical("cp", 2), bad), Error);
  bad = {};
  bad.max_iter = 0;
  CHECK_THROWS_AS(FeasibilityProblem(SuperOperator::identity(2), canonical("cp", 2), bad), Error);
}

TEST_CASE("iteration budget exhaustion is undetermined") {
  Rng rng(51);
  FeasibilityOptions opt;
  opt.max_iter = 1;
  const FeasibilityProblem prob(random_decomposable(2, 3, rng), canonical("decomposable", 2), opt);
  const auto res = feasibility(prob);
  CHECK(res.verdict == Verdict::undetermined);
  CHECK_FALSE(res.diagnostics.empty());
  CHECK_FALSE(res.certificate);
  CHECK_FALSE(res.witness);
}

TEST_CASE("random decomposable maps are certified") {
  Rng rng(52);
  for (int t = 0; t < 5; ++t) {
    const FeasibilityProblem prob(random_decomposable(2, 2 + t % 2, rng), canonical("decomposable", 2));
    const auto res = feasibility(prob);
    REQUIRE(res.verdict == Verdict::feasible);
    // oracle reconstruction
    const Matrix sum = res.certificate->choi[0] + oracle::partial_transpose_first(res.certificate->choi[1], 2, prob.out_dim());
    CHECK((sum - prob.target().choi()).norm() <= prob.feasibility_tolerance());
    for (const auto& x : res.certificate->choi) CHECK(oracle::min_eig(x) >= -1e-8);
  }
}

TEST_CASE("a witness never separates a feasible target") {
  const FeasibilityProblem choi_prob(choi_map(), canonical("decomposable", 3));
  const auto res = feasibility(choi_prob);
  REQUIRE(res.witness);
  Rng rng(53);
  for (int t = 0; t < 10; ++t) {
    const FeasibilityProblem prob(random_decomposable(3, 3, rng), canonical("decomposable", 3));
    const auto check = verify_witness(res.witness->w, prob);
    CHECK_FALSE(check.valid);
    CHECK(check.pairing >= -1e-9);
  }
}

TEST_CASE("conic combinations and left compositions stay certified") {
  Rng rng(54);
  const auto seq = canonical("decomposable", 2);
  const auto a = random_decomposable(2, 2, rng), b = random_decomposable(2, 2, rng);
  const FeasibilityProblem pa(a, seq), pb(b, seq);
  const auto ra = feasibility(pa), rb = feasibility(pb);
  REQUIRE(ra.certificate);
  REQUIRE(rb.certificate);
  SUBCASE("conic_combine") {
    const auto c = conic_combine(*ra.certificate, *rb.certificate, 0.3, 2.0);
    const FeasibilityProblem pc(cplx(0.3) * a + cplx(2.0) * b, seq);
    CHECK(verify_certificate(c, pc).valid);
    CHECK_THROWS_AS(conic_combine(*ra.certificate, *rb.certificate, -1.0, 1.0), Error);
  }
  SUBCASE("left_compose") {
    const auto psi = SuperOperator::kraus({random_gaussian(3, 2, rng), random_gaussian(3, 2, rng)});
    const auto c = left_compose(*ra.certificate, psi);
    const FeasibilityProblem pc(compose(psi, a), seq);
    CHECK(verify_certificate(c, pc).valid);
    CHECK_THROWS_AS(left_compose(*ra.certificate, SuperOperator::transpose(2)), Error);
  }
}

TEST_CASE("verify_certificate rejects tampering") {
  const FeasibilityProblem prob(SuperOperator::transpose(2), canonical("decomposable", 2));
  const auto res = feasibility(prob);
  REQUIRE(res.certificate);
  auto bad = *res.certificate;
  bad.choi[0] -= 0.1 * Matrix::Identity(4, 4);
  CHECK_FALSE(verify_certificate(bad, prob).valid);
  bad = *res.certificate;
  bad.choi[1] *= 1.01;
  CHECK_FALSE(verify_certificate(bad, prob).valid);
}

TEST_CASE("closedness probe on a convergent sequence") {
  // t + (1/j) id converges to t; every member and the limit are decomposable
  const auto seq = canonical("decomposable", 2);
  std::vector<SuperOperator> members;
  for (int j = 1; j <= 4; ++j) members.push_back(SuperOperator::transpose(2) + cplx(1.0 / j) * SuperOperator::identity(2));
  const auto probe = closedness_probe(FeasibilityProblem(SuperOperator::transpose(2), seq), members);
  CHECK(probe.passed);
  CHECK(probe.limit_verdict == Verdict::feasible);
  REQUIRE(probe.member_verdicts.size() == 4);
  for (auto v : probe.member_verdicts) CHECK(v == Verdict::feasible);
}

TEST_CASE("truncated sequences report a tail slack") {
  const auto seq = geometric_identity_sequence(2, 3);
  const FeasibilityProblem prob(SuperOperator::identity(2), seq);
  const auto res = feasibility(prob);
  REQUIRE(res.verdict == Verdict::feasible);
  CHECK(res.tail_slack >= 0.0);
  CHECK(to_string(Verdict::undetermined) == "undetermined");
}
