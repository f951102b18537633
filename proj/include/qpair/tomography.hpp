#pragma once

#include <cstdint>
#include <string>

#include "qpair/records.hpp"

namespace qpair {

// An ordered list of joint analyzer settings that spans the 16-dimensional
// two-qubit operator space.
struct TomographySet {
  std::string name;
  std::vector<std::pair<AnalyzerSetting, AnalyzerSetting>> settings;
};

// "james16": the canonical 16-projection set over the per-arm states
// {H, V, +, -, R, L}, each realized as a (QWP, polarizer) angle pair; the
// first element is (H, H).  "full36": the complete 6x6 product.
// Throws UnknownSet for anything else.
TomographySet standard_set(const std::string& name);

// Solves tr(rho' Pi_i) = rate_i for an unnormalized Hermitian rho' (16 real
// parameters, least squares for overcomplete sets); the state is
// rho'/tr(rho') and tr(rho') estimates the intensity in Hz.  The result may
// be non-PSD.  SingularSystem when the set does not span operator space,
// ZeroTotal when every count is zero, MissingSetting when a set element has
// no matching record.
Mat4 linear_inversion(std::span<const CoincidenceRecord> data, const TomographySet& set,
                      double* intensity_hz = nullptr);

enum class Likelihood { Poisson, Gaussian };

Likelihood likelihood_from_name(const std::string& name);
const char* likelihood_name(Likelihood l);

struct MlOptions {
  Likelihood likelihood = Likelihood::Poisson;
  int max_iters = 5000;
  double tol = 1e-10;               // on the gradient norm of the per-count objective
  double accidental_rate_hz = 0.0;  // optional known accidental floor added to the means
};

struct TomographyResult {
  Mat4 rho_linear = Mat4::Zero();  // raw linear-inversion seed, possibly non-physical
  Mat4 rho_ml = Mat4::Zero();      // physical by construction
  double neg_log_likelihood = 0.0;  // sum over settings of (mu_i - n_i log mu_i), Poisson case
  int iterations = 0;
  bool converged = false;
  double intensity_hz = 0.0;  // fitted counts per unit probability per second
  double gradient_norm = 0.0;
};

// Maximum-likelihood reconstruction over physical states.
//
// rho(t) = T^dag T / tr(T^dag T) with lower-triangular complex T (16 real
// parameters) makes positivity and unit trace automatic.  The negative log
// likelihood of the observed counts given means mu_i = I tr(rho Pi_i) T_i is
// minimized jointly over t and the intensity I (I is profiled out exactly at
// every step).  Deterministic: BFGS with Armijo backtracking, initialized
// from the projected linear-inversion state (Cholesky with a 1e-6 ridge).
// The likelihood never increases across accepted steps.  NotConverged is a
// flag on the result, not an error.
TomographyResult ml_reconstruct(std::span<const CoincidenceRecord> data, const TomographySet& set,
                                const MlOptions& opts = {});

struct TomoReport {
  StateMetrics metrics;
  Eigen::Vector4d eigenvalues = Eigen::Vector4d::Zero();  // of rho_ml, decreasing
  double neg_log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  double intensity_hz = 0.0;
};

TomoReport tomography_report(const TomographyResult& result, const Mat4& target);

namespace detail {

// Objective internals, exposed so tests can check the analytic gradient
// against central finite differences.
struct MlObjective {
  std::vector<Mat4> projectors;
  Eigen::VectorXd counts;
  Eigen::VectorXd durations;
  Likelihood likelihood = Likelihood::Poisson;
  double accidental_rate_hz = 0.0;

  double value(const Eigen::VectorXd& t) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& t) const;
  double intensity(const Eigen::VectorXd& t) const;
};

MlObjective make_objective(std::span<const CoincidenceRecord> data, const TomographySet& set,
                           const MlOptions& opts);

Mat4 rho_from_params(const Eigen::VectorXd& t);
Eigen::VectorXd params_from_state(const Mat4& rho, double ridge);

}  // namespace detail

}  // namespace qpair
