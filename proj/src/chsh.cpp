#include "qpair/chsh.hpp"

#include <cmath>
#include <thread>

#include "qpair/rng.hpp"

namespace qpair {

namespace {

struct RateView {
  double rate = 0.0;
  double var = 0.0;  // Poisson variance of the rate
};

RateView rate_of(const CoincidenceRecord& r) {
  if (!(r.duration_s > 0.0)) raise(Err::Schema, "record with non-positive duration");
  if (r.coincidences < 0) raise(Err::Schema, "record with negative counts");
  double t = r.duration_s;
  return {static_cast<double>(r.coincidences) / t, static_cast<double>(r.coincidences) / (t * t)};
}

Correlation correlation_from_rates(const std::array<RateView, 4>& c) {
  // order: (a,b), (a_perp,b_perp), (a,b_perp), (a_perp,b)
  double num = c[0].rate + c[1].rate - c[2].rate - c[3].rate;
  double den = c[0].rate + c[1].rate + c[2].rate + c[3].rate;
  if (den <= 0.0) raise(Err::ZeroTotal, "all four coincidence rates are zero");
  Correlation out;
  out.e = num / den;
  double var = 0.0;
  for (int i = 0; i < 4; ++i) {
    double sign = i < 2 ? 1.0 : -1.0;
    double d = (sign * den - num) / (den * den);
    var += d * d * c[i].var;
  }
  out.de = std::sqrt(var);
  return out;
}

}  // namespace

Correlation correlation_e(const CoincidenceRecord& ab, const CoincidenceRecord& ap_bp,
                          const CoincidenceRecord& a_bp, const CoincidenceRecord& ap_b) {
  return correlation_from_rates({rate_of(ab), rate_of(ap_bp), rate_of(a_bp), rate_of(ap_b)});
}

std::vector<std::pair<AnalyzerSetting, AnalyzerSetting>> chsh_settings(const ChshAngles& angles) {
  std::vector<std::pair<AnalyzerSetting, AnalyzerSetting>> out;
  out.reserve(16);
  for (double a : {angles.alpha, angles.alpha_prime}) {
    for (double b : {angles.beta, angles.beta_prime}) {
      for (double da : {0.0, 90.0}) {
        for (double db : {0.0, 90.0}) {
          out.emplace_back(AnalyzerSetting::linear(a + da), AnalyzerSetting::linear(b + db));
        }
      }
    }
  }
  return out;
}

namespace {

const CoincidenceRecord* find_record(std::span<const CoincidenceRecord> records, double a_deg,
                                     double b_deg) {
  AnalyzerSetting a = AnalyzerSetting::linear(a_deg);
  AnalyzerSetting b = AnalyzerSetting::linear(b_deg);
  for (const auto& r : records) {
    if (r.setting_a.same_as(a) && r.setting_b.same_as(b)) return &r;
  }
  return nullptr;
}

ChshResult chsh_from(std::span<const CoincidenceRecord> records, const ChshAngles& angles) {
  ChshResult res;
  const std::array<std::pair<double, double>, 4> terms = {{{angles.alpha, angles.beta},
                                                           {angles.alpha, angles.beta_prime},
                                                           {angles.alpha_prime, angles.beta},
                                                           {angles.alpha_prime, angles.beta_prime}}};
  res.counts_used.reserve(16);
  for (int k = 0; k < 4; ++k) {
    auto [a, b] = terms[k];
    std::array<const CoincidenceRecord*, 4> found{};
    const std::array<std::pair<double, double>, 4> offsets = {
        {{0.0, 0.0}, {90.0, 90.0}, {0.0, 90.0}, {90.0, 0.0}}};
    std::array<RateView, 4> rates{};
    for (int i = 0; i < 4; ++i) {
      found[i] = find_record(records, a + offsets[i].first, b + offsets[i].second);
      if (!found[i]) {
        raise(Err::MissingSetting, "no record for analyzer pair (" +
                                       std::to_string(a + offsets[i].first) + ", " +
                                       std::to_string(b + offsets[i].second) + ") deg");
      }
      rates[i] = rate_of(*found[i]);
    }
    res.e_table[k] = correlation_from_rates(rates);
    res.e_table[k].alpha_deg = a;
    res.e_table[k].beta_deg = b;
    for (const auto* r : found) res.counts_used.push_back(*r);
  }
  res.s = res.e_table[0].e - res.e_table[1].e + res.e_table[2].e + res.e_table[3].e;
  double var = 0.0;
  for (const auto& c : res.e_table) var += c.de * c.de;
  res.delta_s = std::sqrt(var);
  res.n_sigma = res.delta_s > 0.0
                    ? (std::abs(res.s) - 2.0) / res.delta_s
                    : std::numeric_limits<double>::infinity();
  return res;
}

}  // namespace

ChshResult chsh_s(std::span<const CoincidenceRecord> records, const ChshAngles& angles) {
  return chsh_from(records, angles);
}

double chsh_sigma_montecarlo(std::span<const CoincidenceRecord> records, const ChshAngles& angles,
                             int trials, std::uint64_t seed, int threads) {
  if (trials < 100) raise(Err::InvalidArgument, "need at least 100 Monte-Carlo trials");
  // validate inputs (and the 16-setting coverage) once up front
  (void)chsh_from(records, angles);

  std::vector<CoincidenceRecord> base(records.begin(), records.end());
  std::vector<double> s_values(trials, 0.0);

  auto run_range = [&](int lo, int hi) {
    std::vector<CoincidenceRecord> resampled = base;
    for (int t = lo; t < hi; ++t) {
      std::mt19937_64 eng = engine_for(seed, {static_cast<std::uint64_t>(t)});
      for (std::size_t i = 0; i < base.size(); ++i) {
        resampled[i].coincidences = poisson_draw(eng, static_cast<double>(base[i].coincidences));
      }
      s_values[t] = chsh_from(resampled, angles).s;
    }
  };

  threads = std::max(1, threads);
  if (threads == 1) {
    run_range(0, trials);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
      int lo = trials * w / threads, hi = trials * (w + 1) / threads;
      pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  double mean = 0.0;
  for (double s : s_values) mean += s;
  mean /= trials;
  double ss = 0.0;
  for (double s : s_values) ss += (s - mean) * (s - mean);
  return std::sqrt(ss / (trials - 1));
}

double ideal_s(const Mat4& rho, const ChshAngles& angles) {
  auto e_exact = [&rho](double a, double b) {
    double p1 = coincidence_probability(rho, AnalyzerSetting::linear(a), AnalyzerSetting::linear(b));
    double p2 =
        coincidence_probability(rho, AnalyzerSetting::linear(a + 90), AnalyzerSetting::linear(b + 90));
    double p3 =
        coincidence_probability(rho, AnalyzerSetting::linear(a), AnalyzerSetting::linear(b + 90));
    double p4 =
        coincidence_probability(rho, AnalyzerSetting::linear(a + 90), AnalyzerSetting::linear(b));
    double den = p1 + p2 + p3 + p4;
    if (den <= 0.0) raise(Err::ZeroTotal, "projector completeness violated");
    return (p1 + p2 - p3 - p4) / den;
  };
  return e_exact(angles.alpha, angles.beta) - e_exact(angles.alpha, angles.beta_prime) +
         e_exact(angles.alpha_prime, angles.beta) + e_exact(angles.alpha_prime, angles.beta_prime);
}

}  // namespace qpair
