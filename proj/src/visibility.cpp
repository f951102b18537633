#include "qpair/visibility.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "qpair/rng.hpp"

namespace qpair {

namespace {

void check_samples(const CorrelationCurve& curve) {
  for (const auto& s : curve.samples) {
    if (!(s.duration_s > 0.0)) raise(Err::Schema, "curve sample with non-positive duration");
    if (s.coincidences < 0) raise(Err::Schema, "curve sample with negative counts");
  }
}

}  // namespace

VisibilityEstimate visibility_minmax(const CorrelationCurve& curve) {
  if (curve.samples.size() < 2) raise(Err::InsufficientData, "need at least 2 samples");
  check_samples(curve);
  const CurveSample* hi = &curve.samples[0];
  const CurveSample* lo = &curve.samples[0];
  for (const auto& s : curve.samples) {
    if (s.rate_hz() > hi->rate_hz()) hi = &s;
    if (s.rate_hz() < lo->rate_hz()) lo = &s;
  }
  double a = hi->rate_hz(), b = lo->rate_hz();
  if (a + b <= 0.0) raise(Err::DegenerateCurve, "C_max + C_min = 0");

  VisibilityEstimate est;
  est.c_max_hz = a;
  est.c_min_hz = b;
  est.v = (a - b) / (a + b);
  // var(rate) = counts / T^2, floored at one count so a zero bin still
  // contributes an uncertainty
  double var_a = std::max<double>(hi->coincidences, 1) / (hi->duration_s * hi->duration_s);
  double var_b = std::max<double>(lo->coincidences, 1) / (lo->duration_s * lo->duration_s);
  double s = a + b;
  double da = 2.0 * b / (s * s);
  double db = -2.0 * a / (s * s);
  est.dv = std::sqrt(da * da * var_a + db * db * var_b);
  return est;
}

VisibilityFit visibility_fit(const CorrelationCurve& curve) {
  if (curve.samples.size() < 8 || curve.span_deg() < 180.0 - 1e-9)
    raise(Err::InsufficientData, "fit needs >= 8 samples spanning >= 180 degrees");
  check_samples(curve);

  const int n = static_cast<int>(curve.samples.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rate(n), duration(n);
  for (int i = 0; i < n; ++i) {
    double t = 2.0 * curve.samples[i].theta_deg * M_PI / 180.0;
    design(i, 0) = 1.0;
    design(i, 1) = std::cos(t);
    design(i, 2) = std::sin(t);
    rate(i) = curve.samples[i].rate_hz();
    duration(i) = curve.samples[i].duration_s;
  }

  // Linear model C = c0 + c1 cos 2t + c2 sin 2t; IRLS with Poisson weights
  // var(rate_i) = model_i / T_i, floored at half a count.
  Eigen::Vector3d coef = Eigen::Vector3d::Zero();
  Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
  Eigen::VectorXd weight(n);
  for (int i = 0; i < n; ++i) weight(i) = 1.0;
  int passes = 3;
  for (int pass = 0; pass < passes; ++pass) {
    normal = design.transpose() * weight.asDiagonal() * design;
    Eigen::Vector3d rhs = design.transpose() * (weight.asDiagonal() * rate);
    Eigen::FullPivLU<Eigen::Matrix3d> lu(normal);
    if (!lu.isInvertible()) raise(Err::FitDiverged, "singular normal equations (too few distinct angles?)");
    coef = lu.solve(rhs);
    for (int i = 0; i < n; ++i) {
      double model = std::max(design.row(i).dot(coef), 0.5 / duration(i));
      weight(i) = duration(i) / model;
    }
  }
  if (!coef.allFinite()) raise(Err::FitDiverged, "fit produced non-finite coefficients");

  double c0 = coef(0), c1 = coef(1), c2 = coef(2);
  double r = std::hypot(c1, c2);
  if (c0 <= 0.0) raise(Err::DegenerateCurve, "fitted mean rate is not positive");

  Eigen::Matrix3d cov = normal.inverse();
  VisibilityFit fit;
  fit.iterations = passes;
  fit.amplitude_hz = 2.0 * r;
  fit.offset_hz = c0 - r;
  fit.v = r / c0;

  double var_r;
  if (r > 1e-12 * c0) {
    Eigen::Vector2d gr(c1 / r, c2 / r);
    var_r = gr(0) * gr(0) * cov(1, 1) + 2.0 * gr(0) * gr(1) * cov(1, 2) + gr(1) * gr(1) * cov(2, 2);
  } else {
    var_r = std::max(cov(1, 1), cov(2, 2));  // amplitude consistent with zero
  }
  fit.amplitude_err_hz = 2.0 * std::sqrt(std::max(var_r, 0.0));
  fit.degenerate = r * r <= var_r;

  {
    // V = r / c0 via the delta method
    double g0 = -r / (c0 * c0);
    double g1 = r > 1e-12 * c0 ? c1 / (r * c0) : 0.0;
    double g2 = r > 1e-12 * c0 ? c2 / (r * c0) : 0.0;
    Eigen::Vector3d g(g0, g1, g2);
    double var_v = g.dot(cov * g);
    if (fit.degenerate) var_v = std::max(var_v, var_r / (c0 * c0));
    fit.dv = std::sqrt(std::max(var_v, 0.0));
  }
  {
    // B = c0 - r
    double g1 = r > 1e-12 * c0 ? -c1 / r : 0.0;
    double g2 = r > 1e-12 * c0 ? -c2 / r : 0.0;
    Eigen::Vector3d g(1.0, g1, g2);
    fit.offset_err_hz = std::sqrt(std::max(g.dot(cov * g), 0.0));
  }
  {
    // c1 = -(A/2) cos 2p, c2 = -(A/2) sin 2p  =>  2p = atan2(-c2, -c1)
    double two_p = std::atan2(-c2, -c1);
    fit.phase_deg = norm_angle_deg(two_p * 0.5 * 180.0 / M_PI);
    double r2 = std::max(r * r, 1e-300);
    double var_2p = (c2 * c2 * cov(1, 1) - 2.0 * c1 * c2 * cov(1, 2) + c1 * c1 * cov(2, 2)) / (r2 * r2);
    fit.phase_err_deg = 0.5 * std::sqrt(std::max(var_2p, 0.0)) * 180.0 / M_PI;
  }
  return fit;
}

double visibility_bootstrap(const CorrelationCurve& curve, VisibilityMethod method, int trials,
                            std::uint64_t seed) {
  if (trials < 2) raise(Err::InvalidArgument, "bootstrap needs at least 2 trials");
  std::vector<double> vs;
  vs.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 eng = engine_for(seed, {static_cast<std::uint64_t>(t)});
    CorrelationCurve resampled = curve;
    for (auto& s : resampled.samples) s.coincidences = poisson_draw(eng, static_cast<double>(s.coincidences));
    try {
      vs.push_back(method == VisibilityMethod::MinMax ? visibility_minmax(resampled).v
                                                      : visibility_fit(resampled).v);
    } catch (const Error&) {
      // degenerate resample; skip
    }
  }
  if (vs.size() < static_cast<std::size_t>(trials) / 2)
    raise(Err::NumericalFailure, "bootstrap: too many degenerate resamples");
  double mean = 0.0;
  for (double v : vs) mean += v;
  mean /= static_cast<double>(vs.size());
  double ss = 0.0;
  for (double v : vs) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(vs.size() - 1));
}

}  // namespace qpair
