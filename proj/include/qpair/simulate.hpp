#pragma once

#include <cstdint>

#include "qpair/records.hpp"
#include "qpair/source.hpp"

namespace qpair {

struct RatePrediction {
  double coincidence_hz = 0.0;  // signal + accidentals
  double singles_a_hz = 0.0;    // includes darks
  double singles_b_hz = 0.0;
  double accidental_hz = 0.0;   // S_a * S_b * window
};

// Detected rates behind the two analyzers for state rho at the given source
// operating point.  Signal coincidences scale with eta_couple^2 eta_detect^2;
// accidentals follow the singles-product model.
RatePrediction predicted_rates(const Mat4& rho, const AnalyzerSetting& a, const AnalyzerSetting& b,
                               const SourceParams& src);

inline double predicted_rate(const Mat4& rho, const AnalyzerSetting& a, const AnalyzerSetting& b,
                             const SourceParams& src) {
  return predicted_rates(rho, a, b, src).coincidence_hz;
}

// Poisson counts with means predicted_rates * duration; bit-reproducible for
// a fixed seed.
CoincidenceRecord simulate_record(const Mat4& rho, const AnalyzerSetting& a, const AnalyzerSetting& b,
                                  const SourceParams& src, double duration_s, std::uint64_t seed);

// Batch helpers used by the CLI and the fixture generator.  Each record uses
// the stream derived from (seed, index), so results do not depend on
// evaluation order.
std::vector<CoincidenceRecord> simulate_settings(
    const Mat4& rho, std::span<const std::pair<AnalyzerSetting, AnalyzerSetting>> settings,
    const SourceParams& src, double duration_s, std::uint64_t seed);

// Expected-value records (counts = round(rate * duration)); at large scale
// this is the noiseless limit used by round-trip oracles.
std::vector<CoincidenceRecord> expected_value_records(
    const Mat4& rho, std::span<const std::pair<AnalyzerSetting, AnalyzerSetting>> settings,
    const SourceParams& src, double duration_s);

// Correlation-curve sweep: fixed analyzer on one arm, linear polarizer swept
// over `span_deg` in `points` steps on the other.
std::vector<CoincidenceRecord> simulate_curve_records(const Mat4& rho, char fixed_arm,
                                                      const AnalyzerSetting& fixed, int points,
                                                      double span_deg, const SourceParams& src,
                                                      double duration_s, std::uint64_t seed);

}  // namespace qpair
