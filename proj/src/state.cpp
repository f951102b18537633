#include "qpair/state.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <limits>
#include <array>
#include <cmath>

namespace qpair {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

Ket4 bell_state(Bell which) {
  Ket4 k = Ket4::Zero();
  switch (which) {
    case Bell::PsiPlus:
      k(1) = kInvSqrt2;
      k(2) = kInvSqrt2;
      break;
    case Bell::PsiMinus:
      k(1) = kInvSqrt2;
      k(2) = -kInvSqrt2;
      break;
    case Bell::PhiPlus:
      k(0) = kInvSqrt2;
      k(3) = kInvSqrt2;
      break;
    case Bell::PhiMinus:
      k(0) = kInvSqrt2;
      k(3) = -kInvSqrt2;
      break;
  }
  return k;
}

Bell bell_from_name(const std::string& name) {
  if (name == "psi-minus" || name == "psi_minus") return Bell::PsiMinus;
  if (name == "psi-plus" || name == "psi_plus") return Bell::PsiPlus;
  if (name == "phi-minus" || name == "phi_minus") return Bell::PhiMinus;
  if (name == "phi-plus" || name == "phi_plus") return Bell::PhiPlus;
  raise(Err::InvalidArgument, "unknown Bell state '" + name + "'");
}

const char* bell_name(Bell which) {
  switch (which) {
    case Bell::PsiPlus: return "psi-plus";
    case Bell::PsiMinus: return "psi-minus";
    case Bell::PhiPlus: return "phi-plus";
    case Bell::PhiMinus: return "phi-minus";
  }
  return "?";
}

Ket4 normalized_ket(const Ket4& amplitudes) {
  double n = amplitudes.norm();
  if (!(n > 0.0) || !std::isfinite(n)) raise(Err::InvalidArgument, "cannot normalize zero/non-finite ket");
  return amplitudes / n;
}

Mat4 density_from_ket(const Ket4& psi) {
  Ket4 k = normalized_ket(psi);
  return k * k.adjoint();
}

Mat4 maximally_mixed() { return Mat4::Identity() / 4.0; }

Mat4 werner_state(double p) {
  if (p < 0.0 || p > 1.0) raise(Err::InvalidArgument, "Werner weight outside [0,1]");
  return p * density_from_ket(bell_state(Bell::PsiMinus)) + (1.0 - p) * maximally_mixed();
}

PhysicalityReport check_physical(const Mat4& rho, double tol_herm, double tol_trace, double tol_eig) {
  PhysicalityReport rep;
  rep.hermiticity_dev = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  rep.trace_dev = std::abs(rho.trace() - Cplx(1.0, 0.0));
  Mat4 herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat4> es(herm, Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  rep.physical = rep.hermiticity_dev <= tol_herm && rep.trace_dev <= tol_trace &&
                 rep.min_eigenvalue >= -tol_eig;
  return rep;
}

Projection hermitize_and_project(const Mat4& raw) {
  if (!raw.allFinite()) raise(Err::InvalidArgument, "matrix has non-finite entries");
  Mat4 herm = 0.5 * (raw + raw.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat4> es(herm);
  if (es.info() != Eigen::Success) raise(Err::NumericalFailure, "eigendecomposition failed");
  Eigen::Vector4d lam = es.eigenvalues();

  Projection out;
  out.min_eigenvalue = lam.minCoeff();
  out.flagged = out.min_eigenvalue < -1e-8;
  Eigen::Vector4d clipped = lam.cwiseMax(0.0);
  out.clipped_weight = (clipped - lam).sum();
  double total = clipped.sum();
  if (total < 1e-14) raise(Err::ZeroTrace, "no positive spectral weight after clipping");

  out.rho = es.eigenvectors() * (clipped / total).asDiagonal() * es.eigenvectors().adjoint();
  out.max_entry_delta = (out.rho - raw).cwiseAbs().maxCoeff();
  return out;
}

double purity(const Mat4& rho) { return (rho * rho).trace().real(); }

namespace {

// Hermitian principal square root.  Eigenvalues below the numerical noise
// floor are clipped to zero before the root so that rank-deficient states
// (pure targets) do not pick up sqrt(eps)-sized phantom components.
Mat4 hermitian_sqrt(const Mat4& m) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(m);
  if (es.info() != Eigen::Success) raise(Err::NumericalFailure, "matrix square root failed to converge");
  Eigen::Vector4d lam = es.eigenvalues();
  double floor = 16.0 * std::numeric_limits<double>::epsilon() * std::max(lam.maxCoeff(), 0.0);
  lam = (lam.array() < floor).select(0.0, lam);
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const Mat4& rho, const Mat4& sigma) {
  // tr sqrt(sqrt(rho) sigma sqrt(rho)) is the nuclear norm of
  // sqrt(rho) sqrt(sigma); the SVD form is symmetric in the arguments by
  // construction and keeps full precision for rank-deficient states.
  Mat4 ra = hermitian_sqrt(0.5 * (rho + rho.adjoint()));
  Mat4 rb = hermitian_sqrt(0.5 * (sigma + sigma.adjoint()));
  Eigen::JacobiSVD<Mat4> svd(ra * rb);
  double tr = svd.singularValues().sum();
  return std::min(tr * tr, 1.0 + 1e-12);
}

double concurrence(const Mat4& rho) {
  // sy x sy in the (HH, HV, VH, VV) basis: antidiagonal (-1, 1, 1, -1).
  Mat4 flip = Mat4::Zero();
  flip(0, 3) = -1.0;
  flip(1, 2) = 1.0;
  flip(2, 1) = 1.0;
  flip(3, 0) = -1.0;
  // The l_i are the square roots, in decreasing order, of the eigenvalues of
  // rho (sy x sy) rho^* (sy x sy).  With B = sqrt(rho) (sy x sy) sqrt(rho)^*
  // that product is similar to B B^dag, so the l_i are the singular values
  // of B; the SVD stays accurate when the spectrum is rank-deficient
  // (pure states), where a non-Hermitian eigensolve loses half the digits.
  Mat4 root = hermitian_sqrt(0.5 * (rho + rho.adjoint()));
  Mat4 b = root * flip * root.conjugate();
  Eigen::JacobiSVD<Mat4> svd(b);
  const auto& lam = svd.singularValues();
  return std::max(0.0, lam(0) - lam(1) - lam(2) - lam(3));
}

StateMetrics state_metrics(const Mat4& rho, const Mat4& target) {
  StateMetrics m;
  m.concurrence = concurrence(rho);
  m.fidelity_to_target = fidelity(rho, target);
  m.purity = purity(rho);
  return m;
}

}  // namespace qpair
