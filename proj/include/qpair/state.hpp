#pragma once

#include <Eigen/Dense>
#include <complex>

#include "qpair/errors.hpp"

namespace qpair {

// Two-photon polarization states live in the fixed product basis
// (HH, HV, VH, VV); every 4-vector and 4x4 matrix in this library uses
// that ordering.
using Ket2 = Eigen::Vector2cd;
using Ket4 = Eigen::Vector4cd;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Cplx = std::complex<double>;

enum class Bell { PsiPlus, PsiMinus, PhiPlus, PhiMinus };

// Normalized Bell ket; PsiMinus = (|HV> - |VH>)/sqrt(2).
Ket4 bell_state(Bell which);

Bell bell_from_name(const std::string& name);  // "psi-minus", "phi-plus", ...
const char* bell_name(Bell which);

// Normalizes to unit norm; throws InvalidArgument on the zero vector.
Ket4 normalized_ket(const Ket4& amplitudes);

// Rank-1 projector |psi><psi| (psi is normalized first).
Mat4 density_from_ket(const Ket4& psi);

Mat4 maximally_mixed();

// p * |Psi-><Psi-| + (1-p) * I/4.
Mat4 werner_state(double p);

struct PhysicalityReport {
  double hermiticity_dev = 0.0;  // max entry |rho - rho^dag|
  double trace_dev = 0.0;        // |tr(rho) - 1|
  double min_eigenvalue = 0.0;   // of the hermitized matrix
  bool physical = false;
};

PhysicalityReport check_physical(const Mat4& rho, double tol_herm = 1e-10, double tol_trace = 1e-10,
                                 double tol_eig = 1e-10);

inline bool is_physical(const Mat4& rho) { return check_physical(rho).physical; }

struct Projection {
  Mat4 rho;                    // nearest physical state
  double max_entry_delta;      // max |rho_ij - raw_ij| against the raw input
  double min_eigenvalue;       // most negative eigenvalue before clipping
  double clipped_weight;       // total negative eigenvalue mass removed
  bool flagged;                // some eigenvalue below -1e-8 had to be repaired
};

// Nearest-physical-state repair for raw (possibly non-Hermitian, non-PSD)
// matrices: hermitize via (M + M^dag)/2, clip negative eigenvalues to zero,
// renormalize the trace to one.  Eigenvalues in (-1e-8, 0) are clipped
// silently; anything below -1e-8 is still repaired but sets `flagged`.
// Throws ZeroTrace when nothing positive remains.
Projection hermitize_and_project(const Mat4& raw);

// tr(rho^2); 1/4 for the maximally mixed two-qubit state, 1 for pure states.
double purity(const Mat4& rho);

// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.  Symmetric in its
// arguments; equals <psi|rho|psi> when sigma is the pure state |psi><psi|.
// Throws NumericalFailure if an eigensolve fails.
double fidelity(const Mat4& rho, const Mat4& sigma);

// Wootters concurrence: C = max(0, l1 - l2 - l3 - l4) with l_i the square
// roots, sorted decreasing, of the eigenvalues of
// rho (sy x sy) rho^* (sy x sy).
double concurrence(const Mat4& rho);

struct StateMetrics {
  double concurrence = 0.0;
  double fidelity_to_target = 0.0;
  double purity = 0.0;
};

StateMetrics state_metrics(const Mat4& rho, const Mat4& target);

}  // namespace qpair
