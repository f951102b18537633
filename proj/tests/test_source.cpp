#include <doctest.h>

#include <cmath>

#include "qpair/source.hpp"
#include "test_support.hpp"

using namespace qpair;
using qtest::rho_bell;

TEST_CASE("source_state hits the Bell states at the ideal settings") {
  SourceParams p = qtest::unit_source();
  p.theta_pump_deg = 45.0;
  p.phi_deg = 180.0;
  CHECK((source_state(p) - rho_bell(Bell::PsiMinus)).cwiseAbs().maxCoeff() < 1e-12);
  p.phi_deg = 0.0;
  CHECK((source_state(p) - rho_bell(Bell::PsiPlus)).cwiseAbs().maxCoeff() < 1e-12);
  p.lambda_white = 1.0;
  CHECK((source_state(p) - maximally_mixed()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("source params are validated") {
  SourceParams p = qtest::unit_source();
  p.lambda_white = 0.6;
  p.lambda_dephase = 0.6;
  CHECK_THROWS_AS(source_state(p), Error);
  p = qtest::unit_source();
  p.eta_couple = 1.2;
  CHECK_THROWS_AS(p.validate(), Error);
  p = qtest::unit_source();
  p.pair_rate_hz = -1.0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("source_state is physical over a random parameter sweep") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    SourceParams p = qtest::unit_source();
    p.theta_pump_deg = 180.0 * u(rng);
    p.phi_deg = 360.0 * u(rng);
    double lw = u(rng), ld = u(rng);
    if (lw + ld > 1.0) {
      lw *= 0.5;
      ld *= 0.5;
    }
    p.lambda_white = lw;
    p.lambda_dephase = ld;
    CHECK(check_physical(source_state(p)).physical);
  }
}

TEST_CASE("source_state is continuous in its parameters") {
  SourceParams base = qtest::unit_source();
  base.theta_pump_deg = 40.0;
  base.phi_deg = 170.0;
  base.lambda_white = 0.05;
  base.lambda_dephase = 0.1;
  Mat4 rho0 = source_state(base);
  auto bump = [&](auto setter) {
    SourceParams p = base;
    setter(p);
    return (source_state(p) - rho0).cwiseAbs().maxCoeff();
  };
  CHECK(bump([](SourceParams& p) { p.theta_pump_deg += 1e-6; }) < 1e-4);
  CHECK(bump([](SourceParams& p) { p.phi_deg += 1e-6; }) < 1e-4);
  CHECK(bump([](SourceParams& p) { p.lambda_white += 1e-6; }) < 1e-4);
  CHECK(bump([](SourceParams& p) { p.lambda_dephase += 1e-6; }) < 1e-4);
}

TEST_CASE("maximal concurrence exactly at the noise-free balanced point") {
  SourceParams p = qtest::unit_source();
  CHECK(concurrence(source_state(p)) == doctest::Approx(1.0).epsilon(1e-12));
  for (double theta : {30.0, 40.0, 44.0}) {
    SourceParams q = qtest::unit_source();
    q.theta_pump_deg = theta;
    CHECK(concurrence(source_state(q)) < 1.0 - 1e-6);
  }
  for (double lw : {0.01, 0.1}) {
    SourceParams q = qtest::unit_source();
    q.lambda_white = lw;
    CHECK(concurrence(source_state(q)) < 1.0 - 1e-6);
  }
  for (double ld : {0.01, 0.1}) {
    SourceParams q = qtest::unit_source();
    q.lambda_dephase = ld;
    CHECK(concurrence(source_state(q)) < 1.0 - 1e-6);
  }
}

TEST_CASE("analytic visibilities: closed forms") {
  Visibilities ideal = analytic_visibilities(rho_bell(Bell::PsiMinus));
  CHECK(ideal.v_hv == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ideal.v_pm == doctest::Approx(1.0).epsilon(1e-12));
  Visibilities plus = analytic_visibilities(rho_bell(Bell::PsiPlus));
  CHECK(plus.v_hv == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(plus.v_pm == doctest::Approx(1.0).epsilon(1e-12));

  for (double p : {0.2, 0.5, 0.937, 1.0}) {
    Visibilities v = analytic_visibilities(werner_state(p));
    CHECK(v.v_hv == doctest::Approx(p).epsilon(1e-12));
    CHECK(v.v_pm == doctest::Approx(p).epsilon(1e-12));
  }

  CHECK_THROWS_AS(analytic_visibilities(Mat4::Zero()), Error);
}

TEST_CASE("dephasing degrades only the diagonal-basis visibility") {
  SourceParams p = qtest::unit_source();
  p.lambda_dephase = 0.2;
  Visibilities v = analytic_visibilities(source_state(p));
  CHECK(v.v_hv == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v.v_pm == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("fit_source_to_visibilities") {
  SourceParams perfect = fit_source_to_visibilities(1.0, 1.0);
  CHECK(perfect.lambda_white == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(perfect.lambda_dephase == doctest::Approx(0.0).epsilon(1e-12));

  SourceParams werner_like = fit_source_to_visibilities(0.9, 0.9);
  CHECK(werner_like.lambda_white == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(werner_like.lambda_dephase == doctest::Approx(0.0).epsilon(1e-9));

  SourceParams paper = fit_source_to_visibilities(0.989, 0.937);
  CHECK(paper.lambda_white == doctest::Approx(0.011).epsilon(1e-9));
  CHECK(paper.lambda_dephase == doctest::Approx(0.052).epsilon(1e-9));
  Visibilities v = analytic_visibilities(source_state(paper));
  CHECK(v.v_hv == doctest::Approx(0.989).epsilon(1e-6));
  CHECK(v.v_pm == doctest::Approx(0.937).epsilon(1e-6));

  CHECK_THROWS_AS(fit_source_to_visibilities(0.9, 0.95), Error);
  CHECK_THROWS_AS(fit_source_to_visibilities(1.1, 0.9), Error);
  CHECK_THROWS_AS(fit_source_to_visibilities(0.9, 0.0), Error);
}

TEST_CASE("coupling ratio") {
  CHECK(coupling_ratio(100.0, 1000.0, 1000.0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(coupling_ratio(0.0, 1000.0, 1000.0) == 0.0);
  CHECK_THROWS_AS(coupling_ratio(10.0, 0.0, 1000.0), Error);
  try {
    coupling_ratio(10.0, 0.0, 1000.0);
  } catch (const Error& e) {
    CHECK(e.code() == Err::ZeroSingles);
  }
}

TEST_CASE("single-mode bandwidth") {
  CHECK(single_mode_bandwidth_nm(0.015) == doctest::Approx(0.368).epsilon(1e-9));
  CHECK(single_mode_bandwidth_nm(0.0552) == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(single_mode_bandwidth_nm(0.030) == doctest::Approx(0.5 * single_mode_bandwidth_nm(0.015)));
  CHECK_THROWS_AS(single_mode_bandwidth_nm(0.0), Error);
  CHECK_THROWS_AS(single_mode_bandwidth_nm(-1.0), Error);
}

TEST_CASE("brightness at the typical operating point") {
  SourceParams p = SourceParams::typical();
  MeasuredRates rates = predicted_raw_rates(p);
  CHECK(rates.s_i_hz == doctest::Approx(30000.0).epsilon(1e-3));
  BrightnessReport rep = brightness_report(rates, p);
  CHECK(rep.eta_c == doctest::Approx(0.0987).epsilon(1e-3));
  CHECK(rep.delta_lambda_nm == doctest::Approx(0.368).epsilon(1e-9));
  CHECK(rep.brightness == doctest::Approx(rep.spectral_brightness * rep.delta_lambda_nm).epsilon(1e-12));
  CHECK(rep.brightness == doctest::Approx(25000.0).epsilon(0.01));
  CHECK(std::abs(rep.spectral_brightness - 6.25e4) / 6.25e4 < 0.20);
}

TEST_CASE("brightness correction models") {
  SourceParams p = qtest::unit_source(1000.0);
  // eta_C = 1 and eta_detect = 1: no correction, generated = detected
  MeasuredRates unity{1000.0, 1000.0, 1000.0};
  BrightnessReport rep = brightness_report(unity, p, PairCorrection::CouplingRatio);
  CHECK(rep.pairs_generated_hz == doctest::Approx(1000.0).epsilon(1e-12));
  CHECK(brightness_report(unity, p, PairCorrection::DetectedOnly).pairs_generated_hz ==
        doctest::Approx(1000.0));
  // Klyshko: S_i S_s / S_C recovers the true pair rate of the model
  SourceParams typ = SourceParams::typical();
  typ.dark_rate_hz = 0.0;
  typ.coinc_window_s = 0.0;
  MeasuredRates r = predicted_raw_rates(typ);
  CHECK(brightness_report(r, typ, PairCorrection::Klyshko).pairs_generated_hz ==
        doctest::Approx(typ.pair_rate_hz).epsilon(1e-9));
  CHECK_THROWS_AS(pair_correction_from_name("nonsense"), Error);
}
