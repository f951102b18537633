#include <doctest.h>

#include <unsupported/Eigen/KroneckerProduct>

#include "qpair/state.hpp"
#include "test_support.hpp"

using namespace qpair;
using qtest::printed_rho_ml;
using qtest::random_density;
using qtest::random_pure_ket;
using qtest::rho_bell;

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

TEST_CASE("bell states have the expected amplitudes and unit norm") {
  Ket4 pm = bell_state(Bell::PsiMinus);
  CHECK(pm(0) == Cplx(0, 0));
  CHECK(pm(1).real() == doctest::Approx(kInvSqrt2).epsilon(1e-12));
  CHECK(pm(2).real() == doctest::Approx(-kInvSqrt2).epsilon(1e-12));
  CHECK(pm(3) == Cplx(0, 0));

  Ket4 pp = bell_state(Bell::PsiPlus);
  CHECK(pp(1).real() == doctest::Approx(kInvSqrt2));
  CHECK(pp(2).real() == doctest::Approx(kInvSqrt2));

  for (Bell b : {Bell::PsiPlus, Bell::PsiMinus, Bell::PhiPlus, Bell::PhiMinus}) {
    CHECK(bell_state(b).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("density_from_ket is a rank-1 projector") {
  Ket4 basis0 = Ket4::Zero();
  basis0(0) = 1.0;
  Mat4 rho = density_from_ket(basis0);
  CHECK(rho(0, 0).real() == doctest::Approx(1.0));
  CHECK(rho.cwiseAbs().sum() == doctest::Approx(1.0).epsilon(1e-12));

  Mat4 pm = rho_bell(Bell::PsiMinus);
  CHECK(pm(1, 1).real() == doctest::Approx(0.5));
  CHECK(pm(2, 2).real() == doctest::Approx(0.5));
  CHECK(pm(1, 2).real() == doctest::Approx(-0.5));
  CHECK(pm(2, 1).real() == doctest::Approx(-0.5));

  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    Mat4 r = density_from_ket(random_pure_ket(rng));
    Eigen::SelfAdjointEigenSolver<Mat4> es(r, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues()(3) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(es.eigenvalues()(0)) < 1e-10);
    CHECK(std::abs(es.eigenvalues()(2)) < 1e-10);
  }
}

TEST_CASE("hermitize_and_project fixes physicality and is idempotent") {
  Mat4 w = werner_state(0.7);
  Projection p = hermitize_and_project(w);
  CHECK((p.rho - w).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_FALSE(p.flagged);

  Mat4 scaled = Mat4::Zero();
  scaled(0, 0) = 2.0;
  Projection q = hermitize_and_project(scaled);
  CHECK(q.rho(0, 0).real() == doctest::Approx(1.0));
  CHECK(q.rho.cwiseAbs().sum() == doctest::Approx(1.0).epsilon(1e-12));

  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    Mat4 noisy = random_density(rng) + 0.05 * Mat4::Random();
    Projection once = hermitize_and_project(noisy);
    Projection twice = hermitize_and_project(once.rho);
    CHECK((twice.rho - once.rho).cwiseAbs().maxCoeff() < 1e-12);
    PhysicalityReport rep = check_physical(once.rho);
    CHECK(rep.physical);
  }

  CHECK_THROWS_AS(hermitize_and_project(Mat4::Zero()), Error);
  CHECK_THROWS_WITH_AS(hermitize_and_project(Mat4(-Mat4::Identity())),
                       doctest::Contains("ZeroTrace"), Error);
}

TEST_CASE("projection of the printed fixture matrix") {
  Mat4 m = printed_rho_ml();
  Projection p = hermitize_and_project(m);
  PhysicalityReport rep = check_physical(p.rho);
  CHECK(rep.physical);
  // the printed matrix carries a -4.3e-3 eigenvalue, so the repair is flagged
  CHECK(p.flagged);
  CHECK(p.min_eigenvalue == doctest::Approx(-0.0042836).epsilon(1e-3));
  // the non-conjugate (1,3)/(3,1) pair and the imaginary HV/VH token dominate
  // the repair distance
  CHECK(p.max_entry_delta == doctest::Approx(0.0321016).epsilon(1e-4));
  CHECK(p.max_entry_delta < 0.04);

  StateMetrics met = state_metrics(p.rho, rho_bell(Bell::PsiMinus));
  // frozen from an independent reference implementation of the projection
  CHECK(met.concurrence == doctest::Approx(0.9604505).epsilon(1e-6));
  CHECK(met.fidelity_to_target == doctest::Approx(0.9790310).epsilon(1e-6));
  CHECK(met.purity == doctest::Approx(0.9591225).epsilon(1e-6));
  // headline values: within 0.02 of the reported (rounded-matrix) numbers
  CHECK(std::abs(met.concurrence - 0.951) < 0.02);
  CHECK(std::abs(met.fidelity_to_target - 0.9743) < 0.02);
  CHECK(std::abs(met.purity - 0.953) < 0.02);
}

TEST_CASE("purity ranges and closed forms") {
  CHECK(purity(maximally_mixed()) == doctest::Approx(0.25).epsilon(1e-12));
  std::mt19937_64 rng(17);
  for (int i = 0; i < 25; ++i) {
    CHECK(purity(density_from_ket(random_pure_ket(rng))) == doctest::Approx(1.0).epsilon(1e-10));
  }
  for (double p : {0.0, 0.2, 0.5, 0.8, 1.0}) {
    CHECK(purity(werner_state(p)) == doctest::Approx((1.0 + 3.0 * p * p) / 4.0).epsilon(1e-9));
  }
}

TEST_CASE("fidelity examples and properties") {
  Mat4 pm = rho_bell(Bell::PsiMinus);
  CHECK(fidelity(pm, pm) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fidelity(maximally_mixed(), pm) == doctest::Approx(0.25).epsilon(1e-9));

  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    Mat4 a = random_density(rng), b = random_density(rng);
    CHECK(fidelity(a, b) == doctest::Approx(fidelity(b, a)).epsilon(1e-9));
  }
  for (int i = 0; i < 100; ++i) {
    Mat4 rho = random_density(rng);
    Ket4 psi = random_pure_ket(rng);
    double direct = (psi.adjoint() * rho * psi).value().real();
    CHECK(fidelity(rho, density_from_ket(psi)) == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("concurrence examples and properties") {
  CHECK(concurrence(rho_bell(Bell::PsiMinus)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(concurrence(rho_bell(Bell::PhiPlus)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(concurrence(maximally_mixed()) == doctest::Approx(0.0).epsilon(1e-12));

  // Werner family: C = max(0, (3p - 1)/2)
  for (double p : {0.0, 0.2, 1.0 / 3.0, 0.5, 0.8, 1.0}) {
    double expected = std::max(0.0, (3.0 * p - 1.0) / 2.0);
    CHECK(concurrence(werner_state(p)) == doctest::Approx(expected).epsilon(1e-9));
  }
  CHECK(concurrence(werner_state(0.8)) == doctest::Approx(0.7).epsilon(1e-9));

  std::mt19937_64 rng(31);
  // product states are separable
  for (int i = 0; i < 50; ++i) {
    CHECK(concurrence(density_from_ket(qtest::random_product_ket(rng))) < 1e-9);
  }
  // pure states: C = |<psi| sy x sy |psi*>| in closed form
  Mat4 flip = Mat4::Zero();
  flip(0, 3) = -1;
  flip(1, 2) = 1;
  flip(2, 1) = 1;
  flip(3, 0) = -1;
  for (int i = 0; i < 50; ++i) {
    Ket4 psi = random_pure_ket(rng);
    double closed = std::abs((psi.transpose() * flip * psi).value());
    CHECK(concurrence(density_from_ket(psi)) == doctest::Approx(closed).epsilon(1e-9));
  }
  // invariance under local unitaries
  for (int i = 0; i < 100; ++i) {
    Mat4 rho = random_density(rng);
    Mat4 u = Eigen::kroneckerProduct(qtest::random_unitary2(rng), qtest::random_unitary2(rng));
    Mat4 rotated = u * rho * u.adjoint();
    CHECK(concurrence(rotated) == doctest::Approx(concurrence(rho)).epsilon(1e-9));
  }
}

TEST_CASE("every constructor yields physical states") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 50; ++i) {
    CHECK(check_physical(density_from_ket(random_pure_ket(rng))).physical);
    CHECK(check_physical(random_density(rng)).physical);
  }
  for (double p : {0.0, 0.33, 0.9, 1.0}) CHECK(check_physical(werner_state(p)).physical);
}
