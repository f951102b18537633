#pragma once

#include <cstdint>

#include "qpair/records.hpp"

namespace qpair {

struct VisibilityEstimate {
  double v = 0.0;
  double dv = 0.0;         // first-order Poisson propagation
  double c_max_hz = 0.0;   // rate at the extreme bins
  double c_min_hz = 0.0;
};

// V = (C_max - C_min) / (C_max + C_min) on rate-normalized counts, with the
// error propagated from the two extreme bins (variance = raw count).
// DegenerateCurve when C_max + C_min = 0.
VisibilityEstimate visibility_minmax(const CorrelationCurve& curve);

struct VisibilityFit {
  double v = 0.0;
  double dv = 0.0;
  double amplitude_hz = 0.0;  // A in C(theta) = A sin^2(theta - phase) + B
  double amplitude_err_hz = 0.0;
  double offset_hz = 0.0;     // B
  double offset_err_hz = 0.0;
  double phase_deg = 0.0;     // phase folded into [0, 180)
  double phase_err_deg = 0.0;
  int iterations = 0;
  bool degenerate = false;    // amplitude indistinguishable from zero
};

// Least-squares fit of C(theta) = A sin^2(theta - phase) + B on rates.  The
// model is linear in (c0, c1, c2) with C = c0 + c1 cos 2theta + c2 sin 2theta,
// so the solve is direct; weights are iteratively refined to the Poisson
// variance of the model prediction and errors come from the weighted normal
// matrix via the delta method (V = sqrt(c1^2 + c2^2) / c0).
// Requires >= 8 samples spanning >= 180 degrees (InsufficientData) and at
// least 3 distinct angles mod 180 (FitDiverged otherwise).
VisibilityFit visibility_fit(const CorrelationCurve& curve);

enum class VisibilityMethod { MinMax, Fit };

// Spread of V over Poisson resamples of every bin; cross-check for the
// analytic error bars.
double visibility_bootstrap(const CorrelationCurve& curve, VisibilityMethod method, int trials,
                            std::uint64_t seed);

}  // namespace qpair
