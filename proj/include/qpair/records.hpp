#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qpair/measurement.hpp"

namespace qpair {

// One coincidence measurement: analyzer settings on both arms, raw counts
// and the acquisition time.
struct CoincidenceRecord {
  AnalyzerSetting setting_a;
  AnalyzerSetting setting_b;
  long long coincidences = 0;
  long long singles_a = 0;
  long long singles_b = 0;
  double duration_s = 0.0;

  double rate_hz() const { return static_cast<double>(coincidences) / duration_s; }
};

struct CurveSample {
  double theta_deg = 0.0;  // swept polarizer angle
  long long coincidences = 0;
  double duration_s = 0.0;

  double rate_hz() const { return static_cast<double>(coincidences) / duration_s; }
};

// Coincidence counts versus one polarizer angle, the other arm held fixed.
struct CorrelationCurve {
  char fixed_arm = 'A';
  AnalyzerSetting fixed_setting;
  std::vector<CurveSample> samples;

  // Swept-angle span; samples are not required to be sorted.
  double span_deg() const;
};

// Collapses records into a curve, requiring one arm's setting to stay
// constant.  When fixed_arm is unset it is auto-detected; throws Schema if
// both arms vary (or both are constant with fewer than 2 samples).
CorrelationCurve curve_from_records(std::span<const CoincidenceRecord> records,
                                    std::optional<char> fixed_arm = std::nullopt);

}  // namespace qpair
