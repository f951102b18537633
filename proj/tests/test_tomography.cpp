#include <doctest.h>

#include <unsupported/Eigen/KroneckerProduct>

#include <Eigen/Dense>

#include "qpair/rng.hpp"
#include "qpair/tomography.hpp"
#include "test_support.hpp"

using namespace qpair;
using qtest::noiseless_records;
using qtest::printed_rho_ml;
using qtest::rho_bell;
using qtest::trace_distance;

namespace {

std::vector<CoincidenceRecord> poisson_records(const Mat4& rho, const TomographySet& set,
                                               double intensity, std::uint64_t seed) {
  std::vector<CoincidenceRecord> out;
  std::mt19937_64 eng(seed);
  for (const auto& [a, b] : set.settings) {
    CoincidenceRecord r;
    r.setting_a = a;
    r.setting_b = b;
    r.duration_s = 1.0;
    r.coincidences = poisson_draw(eng, intensity * coincidence_probability(rho, a, b));
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("standard sets") {
  TomographySet j16 = standard_set("james16");
  CHECK(j16.settings.size() == 16);
  // first element is (H, H): QWP at 0, polarizer at 0 on both arms
  CHECK(j16.settings[0].first.pol_deg == 0.0);
  CHECK(j16.settings[0].first.qwp_deg.value() == 0.0);
  CHECK(j16.settings[0].second.pol_deg == 0.0);

  TomographySet f36 = standard_set("full36");
  CHECK(f36.settings.size() == 36);

  CHECK_THROWS_AS(standard_set("bogus"), Error);
  try {
    standard_set("bogus");
  } catch (const Error& e) {
    CHECK(e.code() == Err::UnknownSet);
  }
}

TEST_CASE("james16 projectors span operator space") {
  TomographySet set = standard_set("james16");
  Eigen::MatrixXcd gram(16, 16);
  std::vector<Mat4> projs;
  for (const auto& [a, b] : set.settings) {
    projs.push_back(Eigen::kroneckerProduct(projector(a), projector(b)).eval());
  }
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) gram(i, j) = (projs[i].adjoint() * projs[j]).trace();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(gram);
  double cond = svd.singularValues()(0) / svd.singularValues()(15);
  CHECK(svd.singularValues()(15) > 1e-6);
  CHECK(cond < 1e4);
}

TEST_CASE("linear inversion recovers states from noiseless data") {
  TomographySet set = standard_set("james16");

  Mat4 pm = rho_bell(Bell::PsiMinus);
  Mat4 rec = linear_inversion(noiseless_records(pm, set.settings), set);
  CHECK(trace_distance(rec, pm) < 1e-9);

  Mat4 truth = hermitize_and_project(printed_rho_ml()).rho;
  double intensity = 0.0;
  Mat4 rec2 = linear_inversion(noiseless_records(truth, set.settings), set, &intensity);
  CHECK(trace_distance(rec2, truth) < 1e-9);
  CHECK(intensity > 0.0);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    Mat4 rho = qtest::random_density(rng);
    CHECK(trace_distance(linear_inversion(noiseless_records(rho, set.settings), set), rho) < 1e-9);
  }

  TomographySet f36 = standard_set("full36");
  Mat4 rec36 = linear_inversion(noiseless_records(truth, f36.settings), f36);
  CHECK(trace_distance(rec36, truth) < 1e-9);
}

TEST_CASE("linear inversion error paths") {
  TomographySet set = standard_set("james16");
  std::vector<CoincidenceRecord> zeros;
  for (const auto& [a, b] : set.settings) {
    CoincidenceRecord r;
    r.setting_a = a;
    r.setting_b = b;
    r.duration_s = 1.0;
    zeros.push_back(r);
  }
  CHECK_THROWS_AS(linear_inversion(zeros, set), Error);
  try {
    linear_inversion(zeros, set);
  } catch (const Error& e) {
    CHECK(e.code() == Err::ZeroTotal);
  }

  auto missing = noiseless_records(rho_bell(Bell::PsiMinus), set.settings);
  missing.erase(missing.begin() + 5);
  CHECK_THROWS_AS(linear_inversion(missing, set), Error);
  try {
    linear_inversion(missing, set);
  } catch (const Error& e) {
    CHECK(e.code() == Err::MissingSetting);
  }
}

TEST_CASE("ml_reconstruct on noiseless singlet data") {
  TomographySet set = standard_set("james16");
  auto records = noiseless_records(rho_bell(Bell::PsiMinus), set.settings, 1e8);
  for (Likelihood lk : {Likelihood::Poisson, Likelihood::Gaussian}) {
    MlOptions opts;
    opts.likelihood = lk;
    TomographyResult res = ml_reconstruct(records, set, opts);
    CHECK(fidelity(res.rho_ml, rho_bell(Bell::PsiMinus)) >= 1.0 - 1e-6);
    CHECK(check_physical(res.rho_ml).physical);
  }
}

TEST_CASE("ml never worsens the projected linear seed") {
  TomographySet set = standard_set("james16");
  Mat4 truth = hermitize_and_project(printed_rho_ml()).rho;
  auto records = poisson_records(truth, set, 4e4, 99);
  MlOptions opts;
  TomographyResult res = ml_reconstruct(records, set, opts);

  detail::MlObjective obj = detail::make_objective(records, set, opts);
  Projection seed = hermitize_and_project(res.rho_linear);
  double total = obj.counts.sum();
  double nll_seed = obj.value(detail::params_from_state(seed.rho, 1e-6)) * total;
  CHECK(res.neg_log_likelihood <= nll_seed + 1e-9);
}

TEST_CASE("analytic gradient matches central finite differences") {
  TomographySet set = standard_set("james16");
  Mat4 truth = hermitize_and_project(printed_rho_ml()).rho;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;

  for (Likelihood lk : {Likelihood::Poisson, Likelihood::Gaussian}) {
    MlOptions opts;
    opts.likelihood = lk;
    auto records = poisson_records(truth, set, 2e4, lk == Likelihood::Poisson ? 5 : 6);
    detail::MlObjective obj = detail::make_objective(records, set, opts);

    int checked = 0;
    for (int pt = 0; pt < 50; ++pt) {
      Eigen::VectorXd x(16);
      for (int k = 0; k < 16; ++k) x(k) = 0.5 + 0.2 * g(rng);
      Eigen::VectorXd grad = obj.gradient(x);
      Eigen::VectorXd fd(16);
      for (int k = 0; k < 16; ++k) {
        double h = 1e-6 * std::max(1.0, std::abs(x(k)));
        Eigen::VectorXd xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        fd(k) = (obj.value(xp) - obj.value(xm)) / (2.0 * h);
      }
      double rel = (grad - fd).norm() / std::max(1e-12, fd.norm());
      CHECK(rel < 1e-5);
      ++checked;
    }
    CHECK(checked == 50);
  }
}

TEST_CASE("ml on Poisson-noisy data stays close and always physical") {
  TomographySet set = standard_set("james16");
  Mat4 truth = hermitize_and_project(printed_rho_ml()).rho;
  std::vector<double> dists;
  for (int t = 0; t < 20; ++t) {
    auto records = poisson_records(truth, set, 4e4, 1000 + t);
    TomographyResult res = ml_reconstruct(records, set);
    PhysicalityReport rep = check_physical(res.rho_ml);
    CHECK(rep.physical);
    dists.push_back(trace_distance(res.rho_ml, truth));
  }
  std::sort(dists.begin(), dists.end());
  CHECK(dists[dists.size() / 2] < 0.05);
}

TEST_CASE("ml with a configured accidental floor removes the accidental bias") {
  TomographySet set = standard_set("james16");
  Mat4 truth = rho_bell(Bell::PsiMinus);
  const double intensity = 2e4, accidental = 200.0;  // 1% of peak signal
  std::vector<CoincidenceRecord> records;
  for (const auto& [a, b] : set.settings) {
    CoincidenceRecord r;
    r.setting_a = a;
    r.setting_b = b;
    r.duration_s = 1.0;
    r.coincidences = std::llround(intensity * coincidence_probability(truth, a, b) + accidental);
    records.push_back(r);
  }
  MlOptions with_floor;
  with_floor.accidental_rate_hz = accidental;
  TomographyResult corrected = ml_reconstruct(records, set, with_floor);
  TomographyResult naive = ml_reconstruct(records, set);
  double f_corrected = fidelity(corrected.rho_ml, truth);
  double f_naive = fidelity(naive.rho_ml, truth);
  CHECK(f_corrected >= 1.0 - 1e-5);
  CHECK(f_corrected > f_naive);
  CHECK(corrected.intensity_hz == doctest::Approx(intensity).epsilon(1e-3));
}

TEST_CASE("ml with a missing setting") {
  TomographySet set = standard_set("james16");
  auto records = noiseless_records(rho_bell(Bell::PsiMinus), set.settings);
  records.erase(records.begin());
  CHECK_THROWS_AS(ml_reconstruct(records, set), Error);
}

TEST_CASE("tomography_report computes metrics and spectrum") {
  TomographySet set = standard_set("james16");
  auto records = noiseless_records(rho_bell(Bell::PsiMinus), set.settings, 1e8);
  TomographyResult res = ml_reconstruct(records, set);
  TomoReport rep = tomography_report(res, rho_bell(Bell::PsiMinus));
  CHECK(rep.metrics.concurrence == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(rep.metrics.fidelity_to_target == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.metrics.purity == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(rep.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(rep.eigenvalues(0) >= rep.eigenvalues(1));
  CHECK(rep.eigenvalues(1) >= rep.eigenvalues(2));

  TomoReport mixed = tomography_report(
      ml_reconstruct(noiseless_records(maximally_mixed(), set.settings, 1e8), set),
      rho_bell(Bell::PsiMinus));
  CHECK(mixed.metrics.concurrence == doctest::Approx(0.0).epsilon(1e-4));
  CHECK(mixed.metrics.fidelity_to_target == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(mixed.metrics.purity == doctest::Approx(0.25).epsilon(1e-3));
}
