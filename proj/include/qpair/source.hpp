#pragma once

#include "qpair/state.hpp"

namespace qpair {

// Parametric model of the Sagnac-loop SPDC source.  The emitted two-photon
// state is
//   rho = (1 - lw - ld) |psi><psi| + ld D(|psi><psi|) + lw I/4
// with |psi> = cos(theta_pump)|HV> + e^{i phi} sin(theta_pump)|VH> and D
// zeroing the HV<->VH coherences.  The remaining fields describe count
// rates, efficiencies and the coincidence electronics.
struct SourceParams {
  double theta_pump_deg = 45.0;   // 45 = balanced superposition (pump HWP at 22.5)
  double phi_deg = 180.0;         // relative HV/VH phase; 180 targets |Psi->
  double lambda_white = 0.0;      // white-noise admixture in [0,1]
  double lambda_dephase = 0.0;    // HV/VH coherence damping in [0,1]
  double pair_rate_hz = 0.0;      // generated pairs per second
  double eta_couple = 1.0;        // fiber-coupling efficiency per arm
  double eta_detect = 1.0;        // detector quantum efficiency per arm
  double dark_rate_hz = 0.0;      // per detector
  double coinc_window_s = 0.0;    // coincidence gate width
  double pump_power_mw = 1.0;
  double crystal_length_m = 0.015;

  void validate() const;  // throws InvalidParams

  // Operating-point defaults of the modelled source: 30 kHz raw singles,
  // 500 Hz darks, 30 ns window, 30% detector efficiency, 15 mm crystal.
  static SourceParams typical();
};

Mat4 source_state(const SourceParams& p);

struct Visibilities {
  double v_hv = 0.0;  // fixed arm at 0
  double v_pm = 0.0;  // fixed arm at 45
};

// Exact visibility of the coincidence curve C(theta2) for the two standard
// fixed-arm angles.  C(theta2) is sinusoidal in 2*theta2, so the extrema
// come from the quadrature components; DegenerateCurve if the curve
// vanishes identically.
Visibilities analytic_visibilities(const Mat4& rho);

// Chooses (lambda_white, lambda_dephase) at theta=45, phi=180 so that
// analytic_visibilities(source_state) hits the targets (within 1e-6).
// Requires 0 < v_pm <= v_hv <= 1; throws Infeasible when no point of the
// noise simplex reaches the targets within 1e-3.
SourceParams fit_source_to_visibilities(double v_hv, double v_pm,
                                        const SourceParams& base = SourceParams::typical());

// Coincidence-to-singles coupling ratio S_C / sqrt(S_i S_s).
double coupling_ratio(double s_c_hz, double s_i_hz, double s_s_hz);

// Single-mode bandwidth of the down-converted photons, Delta_lambda =
// 5.52e-3 / L with L in meters and the result in nm (the constant carries
// nm*m).
double single_mode_bandwidth_nm(double crystal_length_m);

// Detected singles/coincidence rates at open couplers (no analyzers),
// including darks and accidentals.
struct MeasuredRates {
  double s_c_hz = 0.0;
  double s_i_hz = 0.0;
  double s_s_hz = 0.0;
};

MeasuredRates predicted_raw_rates(const SourceParams& p);

// Candidate models for correcting detected coincidences back to generated
// pairs; the paper chain leaves the exact formula to its references, so the
// choice is explicit here.
enum class PairCorrection {
  CouplingRatio,   // R_gen = S_C / (eta_C * eta_detect)
  Klyshko,         // R_gen = S_i * S_s / S_C
  DetectedOnly,    // R_gen = S_C
};

const char* pair_correction_name(PairCorrection m);
PairCorrection pair_correction_from_name(const std::string& name);

struct BrightnessReport {
  double eta_c = 0.0;                // coupling ratio
  double delta_lambda_nm = 0.0;
  double pairs_generated_hz = 0.0;   // after the configured correction
  double brightness = 0.0;           // pairs / (mW s)
  double spectral_brightness = 0.0;  // pairs / (mW s nm)
  PairCorrection correction = PairCorrection::CouplingRatio;
};

// brightness = spectral_brightness * delta_lambda holds exactly.
BrightnessReport brightness_report(const MeasuredRates& measured, const SourceParams& p,
                                   PairCorrection model = PairCorrection::CouplingRatio);

}  // namespace qpair
