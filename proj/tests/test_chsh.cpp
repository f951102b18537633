#include <doctest.h>

#include <cmath>

#include "qpair/chsh.hpp"
#include "qpair/rng.hpp"
#include "test_support.hpp"

using namespace qpair;
using qtest::noiseless_records;
using qtest::rho_bell;

namespace {

CoincidenceRecord rec(double a, double b, long long counts, double dur = 1.0) {
  CoincidenceRecord r;
  r.setting_a = AnalyzerSetting::linear(a);
  r.setting_b = AnalyzerSetting::linear(b);
  r.coincidences = counts;
  r.duration_s = dur;
  return r;
}

constexpr double kSqrt8 = 2.8284271247461903;

}  // namespace

TEST_CASE("correlation_e basic arithmetic") {
  Correlation e1 = correlation_e(rec(0, 22.5, 50), rec(90, 112.5, 50), rec(0, 112.5, 50),
                                 rec(90, 22.5, 50));
  CHECK(e1.e == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(e1.de > 0.0);

  Correlation e2 = correlation_e(rec(0, 22.5, 100), rec(90, 112.5, 100), rec(0, 112.5, 0),
                                 rec(90, 22.5, 0));
  CHECK(e2.e == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(correlation_e(rec(0, 0, 0), rec(90, 90, 0), rec(0, 90, 0), rec(90, 0, 0)), Error);
}

TEST_CASE("correlation_e for the singlet at (0, 22.5)") {
  ChshAngles angles = ChshAngles::canonical();
  auto records = noiseless_records(rho_bell(Bell::PsiMinus), chsh_settings(angles));
  ChshResult res = chsh_s(records, angles);
  CHECK(res.e_table[0].alpha_deg == 0.0);
  CHECK(res.e_table[0].beta_deg == 22.5);
  CHECK(res.e_table[0].e == doctest::Approx(-0.70710678).epsilon(1e-8));
}

TEST_CASE("chsh_s on noiseless singlet data reaches 2 sqrt 2") {
  ChshAngles angles = ChshAngles::canonical();
  auto records = noiseless_records(rho_bell(Bell::PsiMinus), chsh_settings(angles));
  ChshResult res = chsh_s(records, angles);
  CHECK(std::abs(res.s) == doctest::Approx(kSqrt8).epsilon(1e-9));
  CHECK(res.counts_used.size() == 16);
}

TEST_CASE("chsh_s on Werner data follows |S| = 2 sqrt 2 p, via the count-level oracle") {
  ChshAngles angles = ChshAngles::canonical();
  for (double p : {0.25, 0.5, 0.9}) {
    Mat4 rho = werner_state(p);
    auto records = noiseless_records(rho, chsh_settings(angles));
    ChshResult res = chsh_s(records, angles);

    // independent oracle: closed-form probabilities pushed through the
    // correlation and S definitions by hand
    auto prob = [&](double a, double b) {
      double d = (a - b) * M_PI / 180.0;
      return p * 0.5 * std::sin(d) * std::sin(d) + (1.0 - p) * 0.25;
    };
    auto e_closed = [&](double a, double b) {
      double num = prob(a, b) + prob(a + 90, b + 90) - prob(a, b + 90) - prob(a + 90, b);
      double den = prob(a, b) + prob(a + 90, b + 90) + prob(a, b + 90) + prob(a + 90, b);
      return num / den;
    };
    double s_oracle = e_closed(angles.alpha, angles.beta) - e_closed(angles.alpha, angles.beta_prime) +
                      e_closed(angles.alpha_prime, angles.beta) +
                      e_closed(angles.alpha_prime, angles.beta_prime);
    CHECK(res.s == doctest::Approx(s_oracle).epsilon(1e-9));
    CHECK(std::abs(res.s) == doctest::Approx(2.0 * std::sqrt(2.0) * p).epsilon(1e-9));
  }
  auto half = chsh_s(noiseless_records(werner_state(0.5), chsh_settings(angles)), angles);
  CHECK(std::abs(half.s) == doctest::Approx(1.4142).epsilon(1e-4));
}

TEST_CASE("chsh_s equals ideal_s on noiselessly simulated data") {
  ChshAngles angles{10.0, 55.0, 30.0, 80.0};
  std::mt19937_64 rng(19);
  for (int i = 0; i < 10; ++i) {
    Mat4 rho = qtest::random_density(rng);
    auto records = noiseless_records(rho, chsh_settings(angles));
    CHECK(chsh_s(records, angles).s == doctest::Approx(ideal_s(rho, angles)).epsilon(1e-9));
  }
}

TEST_CASE("missing and degenerate settings are reported") {
  ChshAngles angles = ChshAngles::canonical();
  auto records = noiseless_records(rho_bell(Bell::PsiMinus), chsh_settings(angles));
  records.pop_back();
  CHECK_THROWS_AS(chsh_s(records, angles), Error);
  try {
    chsh_s(records, angles);
  } catch (const Error& e) {
    CHECK(e.code() == Err::MissingSetting);
  }

  std::vector<CoincidenceRecord> zeros;
  for (const auto& [a, b] : chsh_settings(angles)) {
    CoincidenceRecord r;
    r.setting_a = a;
    r.setting_b = b;
    r.coincidences = 0;
    r.duration_s = 1.0;
    zeros.push_back(r);
  }
  CHECK_THROWS_AS(chsh_s(zeros, angles), Error);
}

TEST_CASE("n_sigma is negative without a violation") {
  ChshAngles angles = ChshAngles::canonical();
  Ket4 product = Ket4::Zero();
  product(1) = 1.0;  // |HV>
  std::vector<CoincidenceRecord> records;
  std::mt19937_64 rng(77);
  for (const auto& [a, b] : chsh_settings(angles)) {
    RatePrediction rp = predicted_rates(density_from_ket(product), a, b, qtest::unit_source(1e5));
    CoincidenceRecord r;
    r.setting_a = a;
    r.setting_b = b;
    r.duration_s = 1.0;
    r.coincidences = poisson_draw(rng, rp.coincidence_hz);
    records.push_back(r);
  }
  ChshResult res = chsh_s(records, angles);
  CHECK(std::abs(res.s) < 2.0);
  CHECK(res.n_sigma < 0.0);
}

TEST_CASE("ideal_s canonical values") {
  ChshAngles angles = ChshAngles::canonical();
  CHECK(std::abs(ideal_s(rho_bell(Bell::PsiMinus), angles)) == doctest::Approx(kSqrt8).epsilon(1e-12));
  CHECK(std::abs(ideal_s(maximally_mixed(), angles)) < 1e-12);
}

TEST_CASE("ideal_s of a product state never violates the classical bound") {
  Ket4 product = Ket4::Zero();
  product(1) = 1.0;  // |HV>
  Mat4 rho = density_from_ket(product);
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> angle(0.0, 180.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    ChshAngles a{angle(rng), angle(rng), angle(rng), angle(rng)};
    worst = std::max(worst, std::abs(ideal_s(rho, a)));
  }
  CHECK(worst <= 2.0 + 1e-9);
}

TEST_CASE("Tsirelson bound holds for random states and angles (spot check)") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> angle(0.0, 180.0);
  for (int i = 0; i < 300; ++i) {
    Mat4 rho = qtest::random_density(rng);
    ChshAngles a{angle(rng), angle(rng), angle(rng), angle(rng)};
    CHECK(std::abs(ideal_s(rho, a)) <= 2.0 * std::sqrt(2.0) + 1e-9);
  }
}

TEST_CASE("simulated physical states respect Tsirelson up to statistical slack") {
  ChshAngles angles = ChshAngles::canonical();
  SourceParams src = qtest::unit_source(2e4);
  Mat4 pm = rho_bell(Bell::PsiMinus);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto records = simulate_settings(pm, chsh_settings(angles), src, 1.0, seed);
    ChshResult res = chsh_s(records, angles);
    CHECK(std::abs(res.s) <= 2.0 * std::sqrt(2.0) + 5.0 * res.delta_s);
  }
}

TEST_CASE("E stays in [-1, 1] and |S| below 4 for arbitrary counts") {
  ChshAngles angles = ChshAngles::canonical();
  std::mt19937_64 rng(2718);
  std::uniform_int_distribution<long long> counts(0, 5000);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<CoincidenceRecord> records;
    long long total = 0;
    for (const auto& [a, b] : chsh_settings(angles)) {
      CoincidenceRecord r;
      r.setting_a = a;
      r.setting_b = b;
      r.coincidences = counts(rng);
      total += r.coincidences;
      r.duration_s = 1.0;
      records.push_back(r);
    }
    if (total == 0) continue;
    try {
      ChshResult res = chsh_s(records, angles);
      for (const auto& e : res.e_table) {
        CHECK(e.e >= -1.0);
        CHECK(e.e <= 1.0);
      }
      CHECK(std::abs(res.s) <= 4.0);
    } catch (const Error& e) {
      CHECK(e.code() == Err::ZeroTotal);  // a fully zero E-group is legal input
    }
  }
}

TEST_CASE("Monte-Carlo sigma: determinism, Poisson scaling, propagation match") {
  ChshAngles angles = ChshAngles::canonical();
  // large-count noiseless base so the analytic propagation is in its regime
  auto records = noiseless_records(werner_state(0.95), chsh_settings(angles), 4e5);
  ChshResult res = chsh_s(records, angles);

  double mc1 = chsh_sigma_montecarlo(records, angles, 400, 5);
  double mc2 = chsh_sigma_montecarlo(records, angles, 400, 5);
  CHECK(mc1 == doctest::Approx(mc2));  // same seed, bit-stable statistic
  double mc_threaded = chsh_sigma_montecarlo(records, angles, 400, 5, 4);
  CHECK(mc1 == doctest::Approx(mc_threaded));  // thread count cannot matter

  CHECK(mc1 / res.delta_s > 0.9);
  CHECK(mc1 / res.delta_s < 1.1);

  // scaling counts by 100 shrinks the spread about tenfold
  auto big = noiseless_records(werner_state(0.95), chsh_settings(angles), 4e7);
  double mc_big = chsh_sigma_montecarlo(big, angles, 400, 5);
  CHECK(mc1 / mc_big > 8.0);
  CHECK(mc1 / mc_big < 12.0);

  CHECK_THROWS_AS(chsh_sigma_montecarlo(records, angles, 10, 5), Error);
}
