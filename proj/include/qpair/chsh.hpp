#pragma once

#include <array>
#include <cstdint>

#include "qpair/records.hpp"

namespace qpair {

// Polarizer angles for the Bell-CHSH test.  Perpendicular companions are
// realized as pol + 90 with the same (absent) waveplate.
struct ChshAngles {
  double alpha = 0.0;
  double alpha_prime = 45.0;
  double beta = 22.5;
  double beta_prime = 67.5;

  static ChshAngles canonical() { return {}; }
};

struct Correlation {
  double e = 0.0;
  double de = 0.0;
  double alpha_deg = 0.0;
  double beta_deg = 0.0;
};

// E = [C(a,b) + C(a+90,b+90) - C(a,b+90) - C(a+90,b)] / (sum of the four),
// on rate-normalized counts; the error treats each raw count as independent
// Poisson with variance equal to the count.  ZeroTotal when the denominator
// vanishes.
Correlation correlation_e(const CoincidenceRecord& ab, const CoincidenceRecord& ap_bp,
                          const CoincidenceRecord& a_bp, const CoincidenceRecord& ap_b);

struct ChshResult {
  double s = 0.0;
  double delta_s = 0.0;
  double n_sigma = 0.0;  // (|S| - 2) / delta_s, negative when no violation
  std::array<Correlation, 4> e_table{};  // (a,b), (a,b'), (a',b), (a',b')
  std::vector<CoincidenceRecord> counts_used;  // the 16 matched records
};

// S = E(a,b) - E(a,b') + E(a',b) + E(a',b').  The 16 records are matched to
// the angle grid by polarizer angle (mod 180, tolerance 1e-6 deg);
// MissingSetting names any absent combination.
ChshResult chsh_s(std::span<const CoincidenceRecord> records, const ChshAngles& angles);

// Standard deviation of S over Poisson resamples of the 16 counts; the
// independent cross-check for the propagated delta_s.  Thread count never
// changes the result (per-trial derived streams).
double chsh_sigma_montecarlo(std::span<const CoincidenceRecord> records, const ChshAngles& angles,
                             int trials, std::uint64_t seed, int threads = 1);

// S from exact probabilities, no counts involved.
double ideal_s(const Mat4& rho, const ChshAngles& angles);

// The 16 analyzer-pair combinations behind the four correlations.
std::vector<std::pair<AnalyzerSetting, AnalyzerSetting>> chsh_settings(const ChshAngles& angles);

}  // namespace qpair
