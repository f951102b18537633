#include "qpair/records.hpp"

#include <algorithm>
#include <cmath>

namespace qpair {

double CorrelationCurve::span_deg() const {
  if (samples.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(samples.begin(), samples.end(),
                                      [](const CurveSample& x, const CurveSample& y) {
                                        return x.theta_deg < y.theta_deg;
                                      });
  return hi->theta_deg - lo->theta_deg;
}

CorrelationCurve curve_from_records(std::span<const CoincidenceRecord> records,
                                    std::optional<char> fixed_arm) {
  if (records.size() < 2) raise(Err::Schema, "a correlation curve needs at least 2 records");

  auto constant_arm = [&](bool arm_a) {
    const AnalyzerSetting& first = arm_a ? records[0].setting_a : records[0].setting_b;
    for (const auto& r : records) {
      if (!(arm_a ? r.setting_a : r.setting_b).same_as(first)) return false;
    }
    return true;
  };

  char arm;
  if (fixed_arm) {
    arm = *fixed_arm;
    if (arm != 'A' && arm != 'B') raise(Err::InvalidArgument, "fixed_arm must be 'A' or 'B'");
    if (!constant_arm(arm == 'A'))
      raise(Err::Schema, std::string("arm ") + arm + " is not constant across the records");
  } else {
    bool a_const = constant_arm(true), b_const = constant_arm(false);
    if (a_const == b_const)
      raise(Err::Schema, a_const ? "both arms constant; pass fixed_arm explicitly"
                                 : "no arm is held constant across the records");
    arm = a_const ? 'A' : 'B';
  }

  CorrelationCurve curve;
  curve.fixed_arm = arm;
  curve.fixed_setting = arm == 'A' ? records[0].setting_a : records[0].setting_b;
  curve.samples.reserve(records.size());
  for (const auto& r : records) {
    const AnalyzerSetting& swept = arm == 'A' ? r.setting_b : r.setting_a;
    if (swept.qwp_deg)
      raise(Err::Schema, "swept arm must be a bare polarizer (QWP angle present)");
    curve.samples.push_back({swept.pol_deg, r.coincidences, r.duration_s});
  }
  return curve;
}

}  // namespace qpair
