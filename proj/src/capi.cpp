#include "qpair.h"

#include <cstring>
#include <new>
#include <string>

#include "qpair/chsh.hpp"
#include "qpair/io.hpp"
#include "qpair/report.hpp"
#include "qpair/rng.hpp"
#include "qpair/simulate.hpp"
#include "qpair/tomography.hpp"
#include "qpair/visibility.hpp"

struct qp_state {
  qpair::Mat4 rho;
};
struct qp_records {
  std::vector<qpair::CoincidenceRecord> records;
};
struct qp_source {
  qpair::SourceParams params;
};
struct qp_tomo {
  qpair::TomographyResult result;
  qpair::TomographySet set;
  qpair::Likelihood likelihood = qpair::Likelihood::Poisson;
};

namespace {

thread_local std::string g_last_error;

qp_status status_from(qpair::Err e) {
  switch (e) {
    case qpair::Err::Ok: return QP_OK;
    case qpair::Err::InvalidArgument: return QP_ERR_INVALID_ARGUMENT;
    case qpair::Err::InvalidParams: return QP_ERR_INVALID_PARAMS;
    case qpair::Err::Parse: return QP_ERR_PARSE;
    case qpair::Err::Schema: return QP_ERR_SCHEMA;
    case qpair::Err::Io: return QP_ERR_IO;
    case qpair::Err::UnknownSet: return QP_ERR_UNKNOWN_SET;
    case qpair::Err::MissingSetting: return QP_ERR_MISSING_SETTING;
    case qpair::Err::ZeroTrace: return QP_ERR_ZERO_TRACE;
    case qpair::Err::ZeroTotal: return QP_ERR_ZERO_TOTAL;
    case qpair::Err::ZeroSingles: return QP_ERR_ZERO_SINGLES;
    case qpair::Err::NonpositiveLength: return QP_ERR_NONPOSITIVE_LENGTH;
    case qpair::Err::DegenerateCurve: return QP_ERR_DEGENERATE_CURVE;
    case qpair::Err::InsufficientData: return QP_ERR_INSUFFICIENT_DATA;
    case qpair::Err::FitDiverged: return QP_ERR_FIT_DIVERGED;
    case qpair::Err::SingularSystem: return QP_ERR_SINGULAR_SYSTEM;
    case qpair::Err::NumericalFailure: return QP_ERR_NUMERICAL;
    case qpair::Err::NotConverged: return QP_ERR_NOT_CONVERGED;
    case qpair::Err::Infeasible: return QP_ERR_INFEASIBLE;
  }
  return QP_ERR_INTERNAL;
}

template <typename Fn>
qp_status guarded(Fn&& fn) {
  try {
    fn();
    return QP_OK;
  } catch (const qpair::Error& e) {
    g_last_error = e.what();
    return status_from(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return QP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return QP_ERR_INTERNAL;
  }
}

qp_status invalid(const char* what) {
  g_last_error = what;
  return QP_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

qpair::ChshAngles angles_from(const double a[4]) {
  return {a[0], a[1], a[2], a[3]};
}

std::optional<char> parse_fixed_arm(const char* fixed_arm) {
  std::string f = fixed_arm ? fixed_arm : "auto";
  if (f == "auto") return std::nullopt;
  if (f == "A" || f == "a") return 'A';
  if (f == "B" || f == "b") return 'B';
  qpair::raise(qpair::Err::InvalidArgument, "fixed_arm must be \"A\", \"B\" or \"auto\"");
}

}  // namespace

extern "C" {

const char* qp_version(void) { return qpair::kVersion; }

const char* qp_status_name(qp_status s) {
  switch (s) {
    case QP_OK: return "QP_OK";
    case QP_ERR_INVALID_ARGUMENT: return "QP_ERR_INVALID_ARGUMENT";
    case QP_ERR_INVALID_PARAMS: return "QP_ERR_INVALID_PARAMS";
    case QP_ERR_PARSE: return "QP_ERR_PARSE";
    case QP_ERR_SCHEMA: return "QP_ERR_SCHEMA";
    case QP_ERR_IO: return "QP_ERR_IO";
    case QP_ERR_UNKNOWN_SET: return "QP_ERR_UNKNOWN_SET";
    case QP_ERR_MISSING_SETTING: return "QP_ERR_MISSING_SETTING";
    case QP_ERR_ZERO_TRACE: return "QP_ERR_ZERO_TRACE";
    case QP_ERR_ZERO_TOTAL: return "QP_ERR_ZERO_TOTAL";
    case QP_ERR_ZERO_SINGLES: return "QP_ERR_ZERO_SINGLES";
    case QP_ERR_NONPOSITIVE_LENGTH: return "QP_ERR_NONPOSITIVE_LENGTH";
    case QP_ERR_DEGENERATE_CURVE: return "QP_ERR_DEGENERATE_CURVE";
    case QP_ERR_INSUFFICIENT_DATA: return "QP_ERR_INSUFFICIENT_DATA";
    case QP_ERR_FIT_DIVERGED: return "QP_ERR_FIT_DIVERGED";
    case QP_ERR_SINGULAR_SYSTEM: return "QP_ERR_SINGULAR_SYSTEM";
    case QP_ERR_NUMERICAL: return "QP_ERR_NUMERICAL";
    case QP_ERR_NOT_CONVERGED: return "QP_ERR_NOT_CONVERGED";
    case QP_ERR_INFEASIBLE: return "QP_ERR_INFEASIBLE";
    case QP_ERR_INTERNAL: return "QP_ERR_INTERNAL";
  }
  return "QP_ERR_UNKNOWN";
}

const char* qp_last_error(void) { return g_last_error.c_str(); }

void qp_string_free(char* s) { delete[] s; }

/* ---- states ---------------------------------------------------------- */

qp_status qp_state_bell(const char* name, qp_state** out) {
  if (!name || !out) return invalid("null argument");
  return guarded([&] {
    *out = new qp_state{qpair::density_from_ket(qpair::bell_state(qpair::bell_from_name(name)))};
  });
}

qp_status qp_state_load(const char* path, int project, qp_state** out) {
  if (!path || !out) return invalid("null argument");
  return guarded([&] {
    qpair::Mat4 m = qpair::read_density_json(path);
    if (project) m = qpair::hermitize_and_project(m).rho;
    *out = new qp_state{m};
  });
}

qp_status qp_state_save(const qp_state* st, const char* path) {
  if (!st || !path) return invalid("null argument");
  return guarded([&] { qpair::write_density_json(st->rho, path); });
}

qp_status qp_state_from_components(const double re[16], const double im[16], int project,
                                   qp_state** out) {
  if (!re || !im || !out) return invalid("null argument");
  return guarded([&] {
    qpair::Mat4 m;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) m(r, c) = qpair::Cplx(re[4 * r + c], im[4 * r + c]);
    if (project) m = qpair::hermitize_and_project(m).rho;
    *out = new qp_state{m};
  });
}

qp_status qp_state_components(const qp_state* st, double re[16], double im[16]) {
  if (!st || !re || !im) return invalid("null argument");
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      re[4 * r + c] = st->rho(r, c).real();
      im[4 * r + c] = st->rho(r, c).imag();
    }
  }
  return QP_OK;
}

void qp_state_free(qp_state* st) { delete st; }

/* ---- scalar metrics --------------------------------------------------- */

qp_status qp_purity(const qp_state* st, double* out) {
  if (!st || !out) return invalid("null argument");
  return guarded([&] { *out = qpair::purity(st->rho); });
}

qp_status qp_concurrence(const qp_state* st, double* out) {
  if (!st || !out) return invalid("null argument");
  return guarded([&] { *out = qpair::concurrence(st->rho); });
}

qp_status qp_fidelity(const qp_state* a, const qp_state* b, double* out) {
  if (!a || !b || !out) return invalid("null argument");
  return guarded([&] { *out = qpair::fidelity(a->rho, b->rho); });
}

qp_status qp_metrics_json(const qp_state* st, const qp_state* target, const char* target_name,
                          char** json_out) {
  if (!st || !target || !json_out) return invalid("null argument");
  return guarded([&] {
    auto j = qpair::metrics_block_json(st->rho, target->rho, target_name ? target_name : "custom");
    *json_out = dup_string(j.dump(2));
  });
}

/* ---- source model ------------------------------------------------------ */

qp_status qp_source_typical(qp_source** out) {
  if (!out) return invalid("null argument");
  return guarded([&] { *out = new qp_source{qpair::SourceParams::typical()}; });
}

qp_status qp_source_load(const char* path, qp_source** out) {
  if (!path || !out) return invalid("null argument");
  return guarded([&] { *out = new qp_source{qpair::read_source_json(path)}; });
}

qp_status qp_source_save(const qp_source* src, const char* path) {
  if (!src || !path) return invalid("null argument");
  return guarded([&] { qpair::write_source_json(src->params, path); });
}

qp_status qp_source_fit_visibilities(double v_hv, double v_pm, qp_source** out) {
  if (!out) return invalid("null argument");
  return guarded([&] { *out = new qp_source{qpair::fit_source_to_visibilities(v_hv, v_pm)}; });
}

qp_status qp_source_state(const qp_source* src, qp_state** out) {
  if (!src || !out) return invalid("null argument");
  return guarded([&] { *out = new qp_state{qpair::source_state(src->params)}; });
}

qp_status qp_analytic_visibilities(const qp_state* st, double* v_hv, double* v_pm) {
  if (!st || !v_hv || !v_pm) return invalid("null argument");
  return guarded([&] {
    qpair::Visibilities v = qpair::analytic_visibilities(st->rho);
    *v_hv = v.v_hv;
    *v_pm = v.v_pm;
  });
}

qp_status qp_brightness_json(const qp_source* src, const double* s_c_hz, const double* s_i_hz,
                             const double* s_s_hz, const char* correction, char** json_out) {
  if (!src || !json_out) return invalid("null argument");
  return guarded([&] {
    qpair::MeasuredRates rates = qpair::predicted_raw_rates(src->params);
    std::string origin = "model";
    if (s_c_hz || s_i_hz || s_s_hz) {
      if (!(s_c_hz && s_i_hz && s_s_hz))
        qpair::raise(qpair::Err::InvalidArgument, "pass all three rates or none");
      rates = {*s_c_hz, *s_i_hz, *s_s_hz};
      origin = "measured";
    }
    qpair::PairCorrection model =
        correction ? qpair::pair_correction_from_name(correction) : qpair::PairCorrection::CouplingRatio;
    auto j = qpair::brightness_block_json(rates, src->params, model, origin);
    *json_out = dup_string(j.dump(2));
  });
}

void qp_source_free(qp_source* src) { delete src; }

/* ---- records I/O ------------------------------------------------------- */

qp_status qp_records_load_csv(const char* path, qp_records** out) {
  if (!path || !out) return invalid("null argument");
  return guarded([&] { *out = new qp_records{qpair::read_counts_csv(path)}; });
}

qp_status qp_records_load_json(const char* path, qp_records** out) {
  if (!path || !out) return invalid("null argument");
  return guarded([&] { *out = new qp_records{qpair::read_counts_json(path)}; });
}

qp_status qp_records_load_curve_json(const char* path, char* fixed_arm_out, qp_records** out) {
  if (!path || !out) return invalid("null argument");
  return guarded([&] {
    // read via the curve loader to validate, but keep the raw records
    qpair::CorrelationCurve curve = qpair::read_curve_json(path);
    if (fixed_arm_out) *fixed_arm_out = curve.fixed_arm;
    auto recs = qpair::read_counts_json(path);
    *out = new qp_records{std::move(recs)};
  });
}

qp_status qp_records_save_csv(const qp_records* recs, const char* path) {
  if (!recs || !path) return invalid("null argument");
  return guarded([&] { qpair::write_counts_csv(recs->records, path); });
}

qp_status qp_records_save_curve_json(const qp_records* recs, char fixed_arm, const char* path) {
  if (!recs || !path) return invalid("null argument");
  return guarded([&] { qpair::write_curve_json(recs->records, fixed_arm, path); });
}

qp_status qp_records_save_curve_csv(const qp_records* recs, const char* fixed_arm,
                                    const char* path) {
  if (!recs || !path) return invalid("null argument");
  return guarded([&] {
    qpair::CorrelationCurve curve = qpair::curve_from_records(recs->records, parse_fixed_arm(fixed_arm));
    qpair::write_curve_csv(curve, path);
  });
}

qp_status qp_records_size(const qp_records* recs, size_t* out) {
  if (!recs || !out) return invalid("null argument");
  *out = recs->records.size();
  return QP_OK;
}

void qp_records_free(qp_records* recs) { delete recs; }

/* ---- simulation -------------------------------------------------------- */

qp_status qp_simulate_chsh(const qp_state* st, const qp_source* src, const double angles[4],
                           double duration_s, uint64_t seed, qp_records** out) {
  if (!st || !src || !angles || !out) return invalid("null argument");
  return guarded([&] {
    auto settings = qpair::chsh_settings(angles_from(angles));
    *out = new qp_records{qpair::simulate_settings(
        st->rho, settings, src->params, duration_s, qpair::derive_seed(seed, {qpair::kStageSimulate}))};
  });
}

qp_status qp_simulate_tomo(const qp_state* st, const qp_source* src, const char* set_name,
                           double duration_s, uint64_t seed, qp_records** out) {
  if (!st || !src || !set_name || !out) return invalid("null argument");
  return guarded([&] {
    qpair::TomographySet set = qpair::standard_set(set_name);
    *out = new qp_records{qpair::simulate_settings(
        st->rho, set.settings, src->params, duration_s, qpair::derive_seed(seed, {qpair::kStageSimulate}))};
  });
}

qp_status qp_simulate_curve(const qp_state* st, const qp_source* src, char fixed_arm,
                            double fixed_angle_deg, int points, double span_deg, double duration_s,
                            uint64_t seed, qp_records** out) {
  if (!st || !src || !out) return invalid("null argument");
  return guarded([&] {
    *out = new qp_records{qpair::simulate_curve_records(
        st->rho, fixed_arm, qpair::AnalyzerSetting::linear(fixed_angle_deg), points, span_deg,
        src->params, duration_s, qpair::derive_seed(seed, {qpair::kStageSimulate}))};
  });
}

/* ---- analysis ---------------------------------------------------------- */

qp_status qp_visibility_json(const qp_records* recs, const char* fixed_arm, int bootstrap_trials,
                             uint64_t seed, char** json_out) {
  if (!recs || !json_out) return invalid("null argument");
  return guarded([&] {
    qpair::CorrelationCurve curve = qpair::curve_from_records(recs->records, parse_fixed_arm(fixed_arm));
    auto j = qpair::visibility_block_json(curve, bootstrap_trials,
                                          qpair::derive_seed(seed, {qpair::kStageVisibility}));
    *json_out = dup_string(j.dump(2));
  });
}

qp_status qp_chsh_json(const qp_records* recs, const double angles[4], int mc_trials, uint64_t seed,
                       int threads, char** json_out) {
  if (!recs || !angles || !json_out) return invalid("null argument");
  return guarded([&] {
    auto j = qpair::chsh_block_json(recs->records, angles_from(angles), mc_trials,
                                    qpair::derive_seed(seed, {qpair::kStageChsh}), threads);
    *json_out = dup_string(j.dump(2));
  });
}

qp_status qp_ideal_s(const qp_state* st, const double angles[4], double* out) {
  if (!st || !angles || !out) return invalid("null argument");
  return guarded([&] { *out = qpair::ideal_s(st->rho, angles_from(angles)); });
}

qp_status qp_tomography(const qp_records* recs, const char* set_name, const char* likelihood,
                        qp_tomo** out) {
  if (!recs || !out) return invalid("null argument");
  return guarded([&] {
    qpair::TomographySet set = qpair::standard_set(set_name ? set_name : "james16");
    qpair::MlOptions opts;
    opts.likelihood = qpair::likelihood_from_name(likelihood ? likelihood : "poisson");
    qpair::TomographyResult res = qpair::ml_reconstruct(recs->records, set, opts);
    *out = new qp_tomo{std::move(res), std::move(set), opts.likelihood};
  });
}

qp_status qp_tomo_state(const qp_tomo* t, qp_state** out) {
  if (!t || !out) return invalid("null argument");
  return guarded([&] { *out = new qp_state{t->result.rho_ml}; });
}

qp_status qp_tomo_report_json(const qp_tomo* t, const qp_state* target, const char* target_name,
                              char** json_out) {
  if (!t || !target || !json_out) return invalid("null argument");
  return guarded([&] {
    auto j = qpair::tomography_block_json(t->result, t->set, t->likelihood,
                                          target_name ? target_name : "custom", target->rho);
    *json_out = dup_string(j.dump(2));
  });
}

void qp_tomo_free(qp_tomo* t) { delete t; }

/* ---- full pipeline ------------------------------------------------------ */

qp_status qp_report_all(const char* config_path, uint64_t seed, int threads, int stamp,
                        char** json_out) {
  if (!config_path || !json_out) return invalid("null argument");
  return guarded([&] {
    qpair::ReportOptions opts;
    opts.seed = seed;
    opts.threads = threads;
    opts.stamp = stamp != 0;
    auto j = qpair::run_full_characterization(config_path, opts);
    *json_out = dup_string(j.dump(2));
  });
}

qp_status qp_report_render_text(const char* report_json, char** text_out) {
  if (!report_json || !text_out) return invalid("null argument");
  return guarded([&] {
    auto j = nlohmann::ordered_json::parse(report_json);
    *text_out = dup_string(qpair::render_report_text(j));
  });
}

}  // extern "C"
