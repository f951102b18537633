#include "qpair/source.hpp"

#include <cmath>

#include "qpair/measurement.hpp"

namespace qpair {

void SourceParams::validate() const {
  auto bad = [](const std::string& what) { raise(Err::InvalidParams, what); };
  if (!std::isfinite(theta_pump_deg) || !std::isfinite(phi_deg)) bad("non-finite angle");
  if (lambda_white < 0.0 || lambda_white > 1.0) bad("lambda_white outside [0,1]");
  if (lambda_dephase < 0.0 || lambda_dephase > 1.0) bad("lambda_dephase outside [0,1]");
  if (lambda_white + lambda_dephase > 1.0 + 1e-12) bad("lambda_white + lambda_dephase > 1");
  if (pair_rate_hz < 0.0) bad("pair_rate_hz < 0");
  if (eta_couple < 0.0 || eta_couple > 1.0) bad("eta_couple outside [0,1]");
  if (eta_detect < 0.0 || eta_detect > 1.0) bad("eta_detect outside [0,1]");
  if (dark_rate_hz < 0.0) bad("dark_rate_hz < 0");
  if (coinc_window_s < 0.0) bad("coinc_window_s < 0");
  if (pump_power_mw <= 0.0) bad("pump_power_mw <= 0");
  if (crystal_length_m <= 0.0) bad("crystal_length_m <= 0");
}

SourceParams SourceParams::typical() {
  SourceParams p;
  p.theta_pump_deg = 45.0;
  p.phi_deg = 180.0;
  p.lambda_white = 0.0;
  p.lambda_dephase = 0.0;
  // Rates chosen so that open-coupler singles come out at 30 kHz including
  // darks and the coupling ratio at 9.87%.
  p.pair_rate_hz = 296608.0;
  p.eta_couple = 0.331525;
  p.eta_detect = 0.30;
  p.dark_rate_hz = 500.0;
  p.coinc_window_s = 30e-9;
  p.pump_power_mw = 4.0;  // inferred from the brightness target, not a datasheet value
  p.crystal_length_m = 0.015;
  return p;
}

Mat4 source_state(const SourceParams& p) {
  p.validate();
  double th = p.theta_pump_deg * M_PI / 180.0;
  double ph = p.phi_deg * M_PI / 180.0;
  Ket4 psi = Ket4::Zero();
  psi(1) = std::cos(th);
  psi(2) = std::polar(std::sin(th), ph);
  Mat4 pure = psi * psi.adjoint();
  Mat4 dephased = pure;
  dephased(1, 2) = 0.0;
  dephased(2, 1) = 0.0;
  double lw = p.lambda_white, ld = p.lambda_dephase;
  return (1.0 - lw - ld) * pure + ld * dephased + lw * maximally_mixed();
}

namespace {

// C(theta2) at fixed arm-A angle is c0 + c1 cos(2 theta2) + c2 sin(2 theta2);
// three probes pin the coefficients and the extrema follow in closed form.
double curve_visibility(const Mat4& rho, double fixed_deg) {
  AnalyzerSetting fixed = AnalyzerSetting::linear(fixed_deg);
  double p0 = coincidence_probability(rho, fixed, AnalyzerSetting::linear(0.0));
  double p45 = coincidence_probability(rho, fixed, AnalyzerSetting::linear(45.0));
  double p90 = coincidence_probability(rho, fixed, AnalyzerSetting::linear(90.0));
  double c0 = 0.5 * (p0 + p90);
  double c1 = 0.5 * (p0 - p90);
  double c2 = p45 - c0;
  if (c0 < 1e-15) raise(Err::DegenerateCurve, "coincidence curve is identically zero");
  return std::hypot(c1, c2) / c0;
}

}  // namespace

Visibilities analytic_visibilities(const Mat4& rho) {
  return {curve_visibility(rho, 0.0), curve_visibility(rho, 45.0)};
}

SourceParams fit_source_to_visibilities(double v_hv, double v_pm, const SourceParams& base) {
  if (!(v_pm > 0.0) || !(v_pm <= v_hv) || !(v_hv <= 1.0))
    raise(Err::InvalidArgument, "need 0 < v_pm <= v_hv <= 1");
  // For this family V_HV = 1 - lw and V_PM = 1 - lw - ld, so the
  // least-squares fit over the noise simplex is closed-form.
  double lw = 1.0 - v_hv;
  double ld = v_hv - v_pm;
  if (lw < -1e-3 || ld < -1e-3 || lw + ld > 1.0 + 1e-3)
    raise(Err::Infeasible, "targets outside the reachable noise simplex");
  SourceParams p = base;
  p.theta_pump_deg = 45.0;
  p.phi_deg = 180.0;
  p.lambda_white = std::clamp(lw, 0.0, 1.0);
  p.lambda_dephase = std::clamp(ld, 0.0, 1.0);
  Visibilities got = analytic_visibilities(source_state(p));
  if (std::abs(got.v_hv - v_hv) > 1e-3 || std::abs(got.v_pm - v_pm) > 1e-3)
    raise(Err::Infeasible, "fitted state misses the visibility targets");
  if (std::abs(got.v_hv - v_hv) > 1e-6 || std::abs(got.v_pm - v_pm) > 1e-6)
    raise(Err::NumericalFailure, "visibility fit residual above 1e-6");
  return p;
}

double coupling_ratio(double s_c_hz, double s_i_hz, double s_s_hz) {
  if (!(s_i_hz > 0.0) || !(s_s_hz > 0.0)) raise(Err::ZeroSingles, "singles rates must be positive");
  if (s_c_hz < 0.0) raise(Err::InvalidArgument, "negative coincidence rate");
  return s_c_hz / std::sqrt(s_i_hz * s_s_hz);
}

double single_mode_bandwidth_nm(double crystal_length_m) {
  if (!(crystal_length_m > 0.0)) raise(Err::NonpositiveLength, "crystal length must be > 0");
  return 5.52e-3 / crystal_length_m;  // constant in nm*m
}

MeasuredRates predicted_raw_rates(const SourceParams& p) {
  p.validate();
  double eta = p.eta_couple * p.eta_detect;
  double singles = p.pair_rate_hz * eta + p.dark_rate_hz;
  MeasuredRates r;
  r.s_i_hz = singles;
  r.s_s_hz = singles;
  r.s_c_hz = p.pair_rate_hz * eta * eta + singles * singles * p.coinc_window_s;
  return r;
}

const char* pair_correction_name(PairCorrection m) {
  switch (m) {
    case PairCorrection::CouplingRatio: return "coupling-ratio";
    case PairCorrection::Klyshko: return "klyshko";
    case PairCorrection::DetectedOnly: return "detected-only";
  }
  return "?";
}

PairCorrection pair_correction_from_name(const std::string& name) {
  if (name == "coupling-ratio") return PairCorrection::CouplingRatio;
  if (name == "klyshko") return PairCorrection::Klyshko;
  if (name == "detected-only") return PairCorrection::DetectedOnly;
  raise(Err::InvalidArgument, "unknown pair-correction model '" + name + "'");
}

BrightnessReport brightness_report(const MeasuredRates& measured, const SourceParams& p,
                                   PairCorrection model) {
  p.validate();
  BrightnessReport rep;
  rep.correction = model;
  rep.eta_c = coupling_ratio(measured.s_c_hz, measured.s_i_hz, measured.s_s_hz);
  rep.delta_lambda_nm = single_mode_bandwidth_nm(p.crystal_length_m);
  switch (model) {
    case PairCorrection::CouplingRatio:
      if (rep.eta_c <= 0.0 || p.eta_detect <= 0.0)
        raise(Err::ZeroSingles, "coupling-ratio correction needs S_C > 0 and eta_detect > 0");
      rep.pairs_generated_hz = measured.s_c_hz / (rep.eta_c * p.eta_detect);
      break;
    case PairCorrection::Klyshko:
      if (measured.s_c_hz <= 0.0) raise(Err::ZeroTotal, "Klyshko correction needs S_C > 0");
      rep.pairs_generated_hz = measured.s_i_hz * measured.s_s_hz / measured.s_c_hz;
      break;
    case PairCorrection::DetectedOnly:
      rep.pairs_generated_hz = measured.s_c_hz;
      break;
  }
  rep.brightness = rep.pairs_generated_hz / p.pump_power_mw;
  rep.spectral_brightness = rep.brightness / rep.delta_lambda_nm;
  return rep;
}

}  // namespace qpair
