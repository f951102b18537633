#include "qpair/simulate.hpp"

#include <cmath>

#include "qpair/rng.hpp"

namespace qpair {

RatePrediction predicted_rates(const Mat4& rho, const AnalyzerSetting& a, const AnalyzerSetting& b,
                               const SourceParams& src) {
  src.validate();
  double eta = src.eta_couple * src.eta_detect;
  RatePrediction r;
  r.singles_a_hz = src.pair_rate_hz * eta * singles_probability_a(rho, a) + src.dark_rate_hz;
  r.singles_b_hz = src.pair_rate_hz * eta * singles_probability_b(rho, b) + src.dark_rate_hz;
  r.accidental_hz = r.singles_a_hz * r.singles_b_hz * src.coinc_window_s;
  r.coincidence_hz = src.pair_rate_hz * eta * eta * coincidence_probability(rho, a, b) + r.accidental_hz;
  return r;
}

CoincidenceRecord simulate_record(const Mat4& rho, const AnalyzerSetting& a, const AnalyzerSetting& b,
                                  const SourceParams& src, double duration_s, std::uint64_t seed) {
  if (!(duration_s > 0.0)) raise(Err::InvalidArgument, "duration must be > 0");
  RatePrediction r = predicted_rates(rho, a, b, src);
  std::mt19937_64 eng = engine_for(seed, {0});
  CoincidenceRecord rec;
  rec.setting_a = a;
  rec.setting_b = b;
  rec.duration_s = duration_s;
  rec.coincidences = poisson_draw(eng, r.coincidence_hz * duration_s);
  rec.singles_a = poisson_draw(eng, r.singles_a_hz * duration_s);
  rec.singles_b = poisson_draw(eng, r.singles_b_hz * duration_s);
  return rec;
}

std::vector<CoincidenceRecord> simulate_settings(
    const Mat4& rho, std::span<const std::pair<AnalyzerSetting, AnalyzerSetting>> settings,
    const SourceParams& src, double duration_s, std::uint64_t seed) {
  std::vector<CoincidenceRecord> out;
  out.reserve(settings.size());
  for (std::size_t i = 0; i < settings.size(); ++i) {
    out.push_back(simulate_record(rho, settings[i].first, settings[i].second, src, duration_s,
                                  derive_seed(seed, {i})));
  }
  return out;
}

std::vector<CoincidenceRecord> expected_value_records(
    const Mat4& rho, std::span<const std::pair<AnalyzerSetting, AnalyzerSetting>> settings,
    const SourceParams& src, double duration_s) {
  if (!(duration_s > 0.0)) raise(Err::InvalidArgument, "duration must be > 0");
  std::vector<CoincidenceRecord> out;
  out.reserve(settings.size());
  for (const auto& [a, b] : settings) {
    RatePrediction r = predicted_rates(rho, a, b, src);
    CoincidenceRecord rec;
    rec.setting_a = a;
    rec.setting_b = b;
    rec.duration_s = duration_s;
    rec.coincidences = std::llround(r.coincidence_hz * duration_s);
    rec.singles_a = std::llround(r.singles_a_hz * duration_s);
    rec.singles_b = std::llround(r.singles_b_hz * duration_s);
    out.push_back(rec);
  }
  return out;
}

std::vector<CoincidenceRecord> simulate_curve_records(const Mat4& rho, char fixed_arm,
                                                      const AnalyzerSetting& fixed, int points,
                                                      double span_deg, const SourceParams& src,
                                                      double duration_s, std::uint64_t seed) {
  if (points < 2) raise(Err::InvalidArgument, "need at least 2 sweep points");
  if (fixed_arm != 'A' && fixed_arm != 'B') raise(Err::InvalidArgument, "fixed_arm must be 'A' or 'B'");
  std::vector<CoincidenceRecord> out;
  out.reserve(points);
  for (int i = 0; i < points; ++i) {
    double theta = span_deg * static_cast<double>(i) / static_cast<double>(points);
    // keep the sweep coordinate verbatim (e.g. 270 stays 270, not 90); the
    // projector is 180-periodic anyway
    AnalyzerSetting swept{std::nullopt, theta};
    AnalyzerSetting a = fixed_arm == 'A' ? fixed : swept;
    AnalyzerSetting b = fixed_arm == 'A' ? swept : fixed;
    out.push_back(
        simulate_record(rho, a, b, src, duration_s, derive_seed(seed, {static_cast<std::uint64_t>(i)})));
  }
  return out;
}

}  // namespace qpair
