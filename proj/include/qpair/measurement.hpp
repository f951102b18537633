#pragma once

#include <optional>

#include "qpair/state.hpp"

namespace qpair {

// Angle in degrees folded into [0, 180).  Both polarizer axes and waveplate
// fast axes have a 180-degree period.
double norm_angle_deg(double deg);

// One detection arm: an optional quarter-wave plate followed by a linear
// polarizer, angles in degrees from horizontal.
struct AnalyzerSetting {
  std::optional<double> qwp_deg;
  double pol_deg = 0.0;

  static AnalyzerSetting linear(double pol) { return {std::nullopt, norm_angle_deg(pol)}; }
  static AnalyzerSetting with_qwp(double qwp, double pol) {
    return {norm_angle_deg(qwp), norm_angle_deg(pol)};
  }

  AnalyzerSetting normalized() const;
  // Same waveplate, polarizer rotated by 90 degrees.
  AnalyzerSetting perpendicular() const;

  bool same_as(const AnalyzerSetting& other, double tol_deg = 1e-6) const;
};

// Jones matrix of a quarter-wave plate with fast axis at theta:
// QWP(theta) = R(theta) diag(1, i) R(-theta).
Mat2 qwp_jones(double theta_deg);

// Polarization state accepted by the analyzer chain: the photon passes the
// QWP and then the polarizer, so the detected state is QWP(theta)^dag applied
// to the polarizer axis.  Without a QWP this is just (cos p, sin p).
Ket2 analyzer_ket(const AnalyzerSetting& s);

// Rank-1 projector onto analyzer_ket; idempotent, Hermitian, trace one.
Mat2 projector(const AnalyzerSetting& s);

// tr(rho . Pi_a x Pi_b), clamped to [0, 1].
double coincidence_probability(const Mat4& rho, const AnalyzerSetting& a, const AnalyzerSetting& b);

// Marginal pass probabilities tr(rho . Pi x I) and tr(rho . I x Pi).
double singles_probability_a(const Mat4& rho, const AnalyzerSetting& a);
double singles_probability_b(const Mat4& rho, const AnalyzerSetting& b);

}  // namespace qpair
