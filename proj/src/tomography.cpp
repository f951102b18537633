#include "qpair/tomography.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

namespace qpair {

namespace {

struct ArmState {
  const char* label;
  double qwp_deg;
  double pol_deg;
};

// The six per-arm analyzer states as (QWP fast axis, polarizer axis).
// A QWP aligned with the polarizer passes that linear state unchanged;
// a QWP at 0 with the polarizer at +/-45 selects the circular states.
constexpr ArmState kArmStates[] = {
    {"H", 0.0, 0.0},   {"V", 0.0, 90.0},   {"D", 45.0, 45.0},
    {"A", 135.0, 135.0}, {"R", 0.0, 45.0}, {"L", 0.0, 135.0},
};

const ArmState& arm_state(char label) {
  for (const auto& s : kArmStates) {
    if (s.label[0] == label) return s;
  }
  raise(Err::InvalidArgument, std::string("unknown analyzer state '") + label + "'");
}

AnalyzerSetting arm_setting(char label) {
  const ArmState& s = arm_state(label);
  return AnalyzerSetting::with_qwp(s.qwp_deg, s.pol_deg);
}

// Projection order of the canonical 16-element set; starts at (H,H).
constexpr const char* kJames16[] = {"HH", "HV", "VV", "VH", "RH", "RV", "DV", "DH",
                                    "DR", "DD", "RD", "HD", "VD", "VL", "HL", "RL"};

std::vector<Mat4> hermitian_basis() {
  std::vector<Mat4> basis;
  basis.reserve(16);
  for (int i = 0; i < 4; ++i) {
    Mat4 b = Mat4::Zero();
    b(i, i) = 1.0;
    basis.push_back(b);
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      Mat4 re = Mat4::Zero();
      re(i, j) = 1.0;
      re(j, i) = 1.0;
      basis.push_back(re);
      Mat4 im = Mat4::Zero();
      im(i, j) = Cplx(0.0, -1.0);
      im(j, i) = Cplx(0.0, 1.0);
      basis.push_back(im);
    }
  }
  return basis;
}

// Records reordered to the set's layout; every element must match exactly one
// record.
std::vector<const CoincidenceRecord*> align_records(std::span<const CoincidenceRecord> data,
                                                    const TomographySet& set) {
  if (data.size() != set.settings.size())
    raise(data.size() < set.settings.size() ? Err::MissingSetting : Err::Schema,
          "expected " + std::to_string(set.settings.size()) + " records for set '" + set.name +
              "', got " + std::to_string(data.size()));
  std::vector<const CoincidenceRecord*> ordered(set.settings.size(), nullptr);
  std::vector<bool> used(data.size(), false);
  for (std::size_t k = 0; k < set.settings.size(); ++k) {
    const auto& [a, b] = set.settings[k];
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (used[i]) continue;
      if (data[i].setting_a.same_as(a) && data[i].setting_b.same_as(b)) {
        ordered[k] = &data[i];
        used[i] = true;
        break;
      }
    }
    if (!ordered[k])
      raise(Err::MissingSetting, "no record for set element " + std::to_string(k) + " of '" +
                                     set.name + "'");
  }
  return ordered;
}

Mat4 joint_projector(const std::pair<AnalyzerSetting, AnalyzerSetting>& s) {
  return Eigen::kroneckerProduct(projector(s.first), projector(s.second));
}

}  // namespace

TomographySet standard_set(const std::string& name) {
  TomographySet set;
  set.name = name;
  if (name == "james16") {
    for (const char* pair : kJames16)
      set.settings.emplace_back(arm_setting(pair[0]), arm_setting(pair[1]));
  } else if (name == "full36") {
    for (const auto& a : kArmStates)
      for (const auto& b : kArmStates)
        set.settings.emplace_back(AnalyzerSetting::with_qwp(a.qwp_deg, a.pol_deg),
                                  AnalyzerSetting::with_qwp(b.qwp_deg, b.pol_deg));
  } else {
    raise(Err::UnknownSet, "unknown tomography set '" + name + "'");
  }
  return set;
}

Likelihood likelihood_from_name(const std::string& name) {
  if (name == "poisson") return Likelihood::Poisson;
  if (name == "gaussian") return Likelihood::Gaussian;
  raise(Err::InvalidArgument, "unknown likelihood '" + name + "'");
}

const char* likelihood_name(Likelihood l) {
  return l == Likelihood::Poisson ? "poisson" : "gaussian";
}

Mat4 linear_inversion(std::span<const CoincidenceRecord> data, const TomographySet& set,
                      double* intensity_hz) {
  auto ordered = align_records(data, set);
  const int n = static_cast<int>(ordered.size());

  long long total = 0;
  Eigen::VectorXd rate(n);
  for (int i = 0; i < n; ++i) {
    if (!(ordered[i]->duration_s > 0.0)) raise(Err::Schema, "record with non-positive duration");
    if (ordered[i]->coincidences < 0) raise(Err::Schema, "record with negative counts");
    total += ordered[i]->coincidences;
    rate(i) = ordered[i]->rate_hz();
  }
  if (total == 0) raise(Err::ZeroTotal, "all coincidence counts are zero");

  std::vector<Mat4> basis = hermitian_basis();
  Eigen::MatrixXd design(n, 16);
  for (int i = 0; i < n; ++i) {
    Mat4 pi = joint_projector(set.settings[i]);
    for (int k = 0; k < 16; ++k) design(i, k) = (basis[k] * pi).trace().real();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 16)
    raise(Err::SingularSystem, "tomography set does not span operator space (rank " +
                                   std::to_string(qr.rank()) + ")");
  Eigen::VectorXd x = qr.solve(rate);

  Mat4 unnorm = Mat4::Zero();
  for (int k = 0; k < 16; ++k) unnorm += x(k) * basis[k];
  double tau = unnorm.trace().real();
  if (!(tau > 0.0)) raise(Err::ZeroTotal, "estimated intensity is not positive");
  if (intensity_hz) *intensity_hz = tau;
  return unnorm / tau;
}

namespace detail {

Mat4 rho_from_params(const Eigen::VectorXd& t) {
  Mat4 tri = Mat4::Zero();
  int k = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j <= i; ++j) {
      if (i == j) {
        tri(i, j) = t(k++);
      } else {
        tri(i, j) = Cplx(t(k), t(k + 1));
        k += 2;
      }
    }
  }
  Mat4 w = tri.adjoint() * tri;
  double tau = w.trace().real();
  if (!(tau > 0.0)) raise(Err::NumericalFailure, "degenerate Cholesky point");
  return w / tau;
}

Eigen::VectorXd params_from_state(const Mat4& rho, double ridge) {
  Mat4 a = rho + ridge * Mat4::Identity();
  // lower-triangular T with T^dag T = a, via the index-reversal trick
  Mat4 rev = Mat4::Zero();
  rev(0, 3) = rev(1, 2) = rev(2, 1) = rev(3, 0) = 1.0;
  Eigen::LLT<Mat4> llt(rev * a * rev);
  if (llt.info() != Eigen::Success) raise(Err::NumericalFailure, "Cholesky seed failed");
  Mat4 tri = rev * Mat4(llt.matrixL()).adjoint() * rev;

  Eigen::VectorXd t(16);
  int k = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j <= i; ++j) {
      if (i == j) {
        t(k++) = tri(i, j).real();
      } else {
        t(k) = tri(i, j).real();
        t(k + 1) = tri(i, j).imag();
        k += 2;
      }
    }
  }
  return t;
}

namespace {

struct Predicted {
  Eigen::VectorXd prob;   // tr(rho Pi_i)
  Eigen::VectorXd mu;     // expected counts
  double intensity = 0.0; // Hz
};

double profile_intensity_poisson(const Eigen::VectorXd& prob, const Eigen::VectorXd& counts,
                                 const Eigen::VectorXd& durations, double acc) {
  double exposure = prob.dot(durations);
  if (!(exposure > 0.0)) return 0.0;
  double total = counts.sum();
  if (acc <= 0.0) return total / exposure;
  // solve sum_i T_i p_i (1 - n_i / mu_i(I)) = 0 by Newton; convex in I
  double intensity = std::max((total - acc * durations.sum()) / exposure, 1e-12);
  for (int it = 0; it < 60; ++it) {
    double g = 0.0, h = 0.0;
    for (int i = 0; i < prob.size(); ++i) {
      double mu = (intensity * prob(i) + acc) * durations(i);
      if (mu <= 0.0) continue;
      double d = durations(i) * prob(i);
      g += d * (1.0 - counts(i) / mu);
      h += d * d * counts(i) / (mu * mu);
    }
    if (std::abs(g) < 1e-12 * std::max(1.0, exposure)) break;
    double step = h > 0.0 ? g / h : g;
    intensity = std::max(intensity - step, 0.0);
  }
  return intensity;
}

double profile_intensity_gaussian(const Eigen::VectorXd& prob, const Eigen::VectorXd& counts,
                                  const Eigen::VectorXd& durations, double acc) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < prob.size(); ++i) {
    double var = std::max(counts(i), 1.0);
    double c = prob(i) * durations(i);
    num += c * (counts(i) - acc * durations(i)) / var;
    den += c * c / var;
  }
  return den > 0.0 ? std::max(num / den, 0.0) : 0.0;
}

Predicted predict(const MlObjective& obj, const Mat4& rho) {
  Predicted p;
  const int n = static_cast<int>(obj.projectors.size());
  p.prob.resize(n);
  for (int i = 0; i < n; ++i)
    p.prob(i) = std::max((rho * obj.projectors[i]).trace().real(), 0.0);
  p.intensity = obj.likelihood == Likelihood::Poisson
                    ? profile_intensity_poisson(p.prob, obj.counts, obj.durations, obj.accidental_rate_hz)
                    : profile_intensity_gaussian(p.prob, obj.counts, obj.durations, obj.accidental_rate_hz);
  p.mu = ((p.intensity * p.prob).array() + obj.accidental_rate_hz).matrix().cwiseProduct(obj.durations);
  return p;
}

}  // namespace

double MlObjective::intensity(const Eigen::VectorXd& t) const {
  return predict(*this, rho_from_params(t)).intensity;
}

// Per-count negative log likelihood (a monotone rescale keeps the fixed
// gradient tolerance meaningful across count scales).
double MlObjective::value(const Eigen::VectorXd& t) const {
  Predicted p = predict(*this, rho_from_params(t));
  double total = counts.sum();
  double nll = 0.0;
  if (likelihood == Likelihood::Poisson) {
    for (int i = 0; i < counts.size(); ++i) {
      nll += p.mu(i);
      if (counts(i) > 0.0) {
        if (p.mu(i) <= 0.0) return 1e300;
        nll -= counts(i) * std::log(p.mu(i));
      }
    }
  } else {
    for (int i = 0; i < counts.size(); ++i) {
      double var = std::max(counts(i), 1.0);
      double d = p.mu(i) - counts(i);
      nll += 0.5 * d * d / var;
    }
  }
  return nll / total;
}

Eigen::VectorXd MlObjective::gradient(const Eigen::VectorXd& t) const {
  Mat4 tri = Mat4::Zero();
  {
    int k = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j <= i; ++j) {
        if (i == j) {
          tri(i, j) = t(k++);
        } else {
          tri(i, j) = Cplx(t(k), t(k + 1));
          k += 2;
        }
      }
  }
  Mat4 w = tri.adjoint() * tri;
  double tau = w.trace().real();
  Mat4 rho = w / tau;
  Predicted p = predict(*this, rho);
  double total = counts.sum();

  // dp_i = 2 Re tr(dT^dag M_i), M_i = (T Pi_i - p_i T) / tau; the intensity
  // is profiled, so d(NLL)/dI = 0 and only the explicit p-dependence counts.
  Eigen::VectorXd wgt(counts.size());
  for (int i = 0; i < counts.size(); ++i) {
    double dmu = p.intensity * durations(i);
    if (likelihood == Likelihood::Poisson) {
      double ratio = counts(i) > 0.0 ? counts(i) / std::max(p.mu(i), 1e-300) : 0.0;
      wgt(i) = dmu * (1.0 - ratio);
    } else {
      double var = std::max(counts(i), 1.0);
      wgt(i) = dmu * (p.mu(i) - counts(i)) / var;
    }
  }

  Mat4 s = Mat4::Zero();
  double wp = 0.0;
  for (int i = 0; i < counts.size(); ++i) {
    s += wgt(i) * projectors[i];
    wp += wgt(i) * p.prob(i);
  }
  Mat4 m = (tri * s - wp * tri) / tau;

  Eigen::VectorXd g(16);
  int k = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j <= i; ++j) {
      if (i == j) {
        g(k++) = 2.0 * m(i, j).real();
      } else {
        g(k) = 2.0 * m(i, j).real();
        g(k + 1) = 2.0 * m(i, j).imag();
        k += 2;
      }
    }
  }
  return g / total;
}

MlObjective make_objective(std::span<const CoincidenceRecord> data, const TomographySet& set,
                           const MlOptions& opts) {
  auto ordered = align_records(data, set);
  MlObjective obj;
  obj.likelihood = opts.likelihood;
  obj.accidental_rate_hz = opts.accidental_rate_hz;
  const int n = static_cast<int>(ordered.size());
  obj.counts.resize(n);
  obj.durations.resize(n);
  obj.projectors.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (!(ordered[i]->duration_s > 0.0)) raise(Err::Schema, "record with non-positive duration");
    if (ordered[i]->coincidences < 0) raise(Err::Schema, "record with negative counts");
    obj.counts(i) = static_cast<double>(ordered[i]->coincidences);
    obj.durations(i) = ordered[i]->duration_s;
    obj.projectors.push_back(joint_projector(set.settings[i]));
  }
  if (obj.counts.sum() <= 0.0) raise(Err::ZeroTotal, "all coincidence counts are zero");
  return obj;
}

}  // namespace detail

namespace {

struct BfgsOutcome {
  Eigen::VectorXd x;
  double f = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Dense BFGS with Armijo backtracking; deterministic, monotone in f.
BfgsOutcome bfgs_minimize(const detail::MlObjective& obj, Eigen::VectorXd x, int max_iters,
                          double tol) {
  const int dim = static_cast<int>(x.size());
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(dim, dim);
  double f = obj.value(x);
  Eigen::VectorXd g = obj.gradient(x);

  BfgsOutcome out;
  int iter = 0;
  for (; iter < max_iters; ++iter) {
    if (g.norm() < tol) {
      out.converged = true;
      break;
    }
    Eigen::VectorXd dir = -(hinv * g);
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {  // curvature estimate went bad; restart steepest
      hinv.setIdentity();
      dir = -g;
      slope = g.dot(dir);
    }
    double step = 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      f_new = obj.value(x + step * dir);
      if (f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no decrease possible at this scale

    Eigen::VectorXd x_new = x + step * dir;
    Eigen::VectorXd g_new = obj.gradient(x_new);
    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = g_new - g;
    double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      Eigen::MatrixXd left = Eigen::MatrixXd::Identity(dim, dim) - (s * y.transpose()) / sy;
      hinv = left * hinv * left.transpose() + (s * s.transpose()) / sy;
    }
    x = x_new;
    f = f_new;
    g = g_new;
  }
  if (!out.converged && g.norm() < tol) out.converged = true;
  out.x = x;
  out.f = f;
  out.gradient_norm = g.norm();
  out.iterations = iter;
  return out;
}

}  // namespace

TomographyResult ml_reconstruct(std::span<const CoincidenceRecord> data, const TomographySet& set,
                                const MlOptions& opts) {
  detail::MlObjective obj = detail::make_objective(data, set, opts);

  TomographyResult res;
  double lin_intensity = 0.0;
  res.rho_linear = linear_inversion(data, set, &lin_intensity);
  Projection seed = hermitize_and_project(res.rho_linear);
  Eigen::VectorXd x0 = detail::params_from_state(seed.rho, 1e-6);

  BfgsOutcome run = bfgs_minimize(obj, x0, opts.max_iters, opts.tol);

  res.rho_ml = detail::rho_from_params(run.x);
  res.neg_log_likelihood = run.f * obj.counts.sum();
  res.iterations = run.iterations;
  res.converged = run.converged;
  res.gradient_norm = run.gradient_norm;
  res.intensity_hz = obj.intensity(run.x);
  return res;
}

TomoReport tomography_report(const TomographyResult& result, const Mat4& target) {
  TomoReport rep;
  rep.metrics = state_metrics(result.rho_ml, target);
  Eigen::SelfAdjointEigenSolver<Mat4> es(result.rho_ml, Eigen::EigenvaluesOnly);
  Eigen::Vector4d lam = es.eigenvalues();
  std::sort(lam.data(), lam.data() + 4, std::greater<double>());
  rep.eigenvalues = lam;
  rep.neg_log_likelihood = result.neg_log_likelihood;
  rep.iterations = result.iterations;
  rep.converged = result.converged;
  rep.intensity_hz = result.intensity_hz;
  return rep;
}

}  // namespace qpair
