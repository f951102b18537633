#include "qpair/measurement.hpp"

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

namespace qpair {

double norm_angle_deg(double deg) {
  if (!std::isfinite(deg)) raise(Err::InvalidArgument, "non-finite angle");
  double a = std::fmod(deg, 180.0);
  if (a < 0.0) a += 180.0;
  return a == 180.0 ? 0.0 : a;
}

AnalyzerSetting AnalyzerSetting::normalized() const {
  AnalyzerSetting s;
  s.pol_deg = norm_angle_deg(pol_deg);
  if (qwp_deg) s.qwp_deg = norm_angle_deg(*qwp_deg);
  return s;
}

AnalyzerSetting AnalyzerSetting::perpendicular() const {
  AnalyzerSetting s = *this;
  s.pol_deg = norm_angle_deg(pol_deg + 90.0);
  return s;
}

bool AnalyzerSetting::same_as(const AnalyzerSetting& other, double tol_deg) const {
  AnalyzerSetting a = normalized(), b = other.normalized();
  auto close = [tol_deg](double x, double y) {
    double d = std::abs(x - y);
    return std::min(d, 180.0 - d) <= tol_deg;  // 0 and 180 - eps are neighbours
  };
  if (a.qwp_deg.has_value() != b.qwp_deg.has_value()) return false;
  if (a.qwp_deg && !close(*a.qwp_deg, *b.qwp_deg)) return false;
  return close(a.pol_deg, b.pol_deg);
}

Mat2 qwp_jones(double theta_deg) {
  double t = theta_deg * M_PI / 180.0;
  Mat2 rot;
  rot << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  Mat2 retard = Mat2::Zero();
  retard(0, 0) = 1.0;
  retard(1, 1) = Cplx(0.0, 1.0);
  return rot * retard * rot.transpose();
}

Ket2 analyzer_ket(const AnalyzerSetting& s) {
  double p = s.pol_deg * M_PI / 180.0;
  Ket2 pol(std::cos(p), std::sin(p));
  if (!s.qwp_deg) return pol;
  return qwp_jones(*s.qwp_deg).adjoint() * pol;
}

Mat2 projector(const AnalyzerSetting& s) {
  Ket2 a = analyzer_ket(s);
  return a * a.adjoint();
}

double coincidence_probability(const Mat4& rho, const AnalyzerSetting& a, const AnalyzerSetting& b) {
  Mat4 joint = Eigen::kroneckerProduct(projector(a), projector(b));
  double p = (rho * joint).trace().real();
  return std::clamp(p, 0.0, 1.0);
}

double singles_probability_a(const Mat4& rho, const AnalyzerSetting& a) {
  Mat4 joint = Eigen::kroneckerProduct(projector(a), Mat2::Identity());
  return std::clamp((rho * joint).trace().real(), 0.0, 1.0);
}

double singles_probability_b(const Mat4& rho, const AnalyzerSetting& b) {
  Mat4 joint = Eigen::kroneckerProduct(Mat2::Identity(), projector(b));
  return std::clamp((rho * joint).trace().real(), 0.0, 1.0);
}

}  // namespace qpair
