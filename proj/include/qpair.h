/*
 * qpair - simulation and analysis of polarization-entangled photon-pair
 * experiments: source modelling, coincidence counting, visibility, the
 * Bell-CHSH test, maximum-likelihood state tomography and state metrics.
 *
 * C API over opaque handles.  Every function returns QP_OK or an error
 * code; qp_last_error() gives the thread-local message of the most recent
 * failure.  Strings returned through char** are heap-allocated and must be
 * released with qp_string_free().
 *
 * Basis convention: two-photon states are ordered (HH, HV, VH, VV); angles
 * are degrees from horizontal.
 */

#ifndef QPAIR_H
#define QPAIR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define QPAIR_API __declspec(dllexport)
#else
#define QPAIR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qp_status {
  QP_OK = 0,
  QP_ERR_INVALID_ARGUMENT = 1,
  QP_ERR_INVALID_PARAMS = 2,
  QP_ERR_PARSE = 3,
  QP_ERR_SCHEMA = 4,
  QP_ERR_IO = 5,
  QP_ERR_UNKNOWN_SET = 6,
  QP_ERR_MISSING_SETTING = 7,
  QP_ERR_ZERO_TRACE = 8,
  QP_ERR_ZERO_TOTAL = 9,
  QP_ERR_ZERO_SINGLES = 10,
  QP_ERR_NONPOSITIVE_LENGTH = 11,
  QP_ERR_DEGENERATE_CURVE = 12,
  QP_ERR_INSUFFICIENT_DATA = 13,
  QP_ERR_FIT_DIVERGED = 14,
  QP_ERR_SINGULAR_SYSTEM = 15,
  QP_ERR_NUMERICAL = 16,
  QP_ERR_NOT_CONVERGED = 17,
  QP_ERR_INFEASIBLE = 18,
  QP_ERR_INTERNAL = 99
} qp_status;

typedef struct qp_state qp_state;     /* two-qubit density matrix */
typedef struct qp_records qp_records; /* list of coincidence records */
typedef struct qp_source qp_source;   /* source-model parameters */
typedef struct qp_tomo qp_tomo;       /* tomography result */

QPAIR_API const char* qp_version(void);
QPAIR_API const char* qp_status_name(qp_status s);
QPAIR_API const char* qp_last_error(void);
QPAIR_API void qp_string_free(char* s);

/* ---- states ---------------------------------------------------------- */

/* name: "psi-minus", "psi-plus", "phi-minus", "phi-plus" */
QPAIR_API qp_status qp_state_bell(const char* name, qp_state** out);

/* Density-matrix JSON file ({"dim":4,"re":...,"im":...,"basis":"HH,HV,VH,VV"}).
 * project != 0 repairs a raw matrix to the nearest physical state
 * (hermitize, clip negative eigenvalues, renormalize the trace). */
QPAIR_API qp_status qp_state_load(const char* path, int project, qp_state** out);
QPAIR_API qp_status qp_state_save(const qp_state* st, const char* path);

/* re/im are row-major 4x4 in the (HH,HV,VH,VV) basis. */
QPAIR_API qp_status qp_state_from_components(const double re[16], const double im[16], int project,
                                             qp_state** out);
QPAIR_API qp_status qp_state_components(const qp_state* st, double re[16], double im[16]);
QPAIR_API void qp_state_free(qp_state* st);

/* ---- scalar metrics --------------------------------------------------- */

QPAIR_API qp_status qp_purity(const qp_state* st, double* out);
QPAIR_API qp_status qp_concurrence(const qp_state* st, double* out);
QPAIR_API qp_status qp_fidelity(const qp_state* a, const qp_state* b, double* out);

/* Concurrence, fidelity-to-target, purity and spectrum as a JSON report. */
QPAIR_API qp_status qp_metrics_json(const qp_state* st, const qp_state* target,
                                    const char* target_name, char** json_out);

/* ---- source model ------------------------------------------------------ */

QPAIR_API qp_status qp_source_typical(qp_source** out);
QPAIR_API qp_status qp_source_load(const char* path, qp_source** out);
QPAIR_API qp_status qp_source_save(const qp_source* src, const char* path);

/* Noise weights fitted so the model visibilities hit (v_hv, v_pm). */
QPAIR_API qp_status qp_source_fit_visibilities(double v_hv, double v_pm, qp_source** out);
QPAIR_API qp_status qp_source_state(const qp_source* src, qp_state** out);
QPAIR_API qp_status qp_analytic_visibilities(const qp_state* st, double* v_hv, double* v_pm);

/* correction: "coupling-ratio" | "klyshko" | "detected-only".  Rates are the
 * open-coupler singles/coincidence rates; pass NULLs to use the model
 * prediction for `src`. */
QPAIR_API qp_status qp_brightness_json(const qp_source* src, const double* s_c_hz,
                                       const double* s_i_hz, const double* s_s_hz,
                                       const char* correction, char** json_out);
QPAIR_API void qp_source_free(qp_source* src);

/* ---- records I/O ------------------------------------------------------- */

QPAIR_API qp_status qp_records_load_csv(const char* path, qp_records** out);
QPAIR_API qp_status qp_records_load_json(const char* path, qp_records** out);

/* Correlation-curve JSON; *fixed_arm_out receives 'A' or 'B'. */
QPAIR_API qp_status qp_records_load_curve_json(const char* path, char* fixed_arm_out,
                                               qp_records** out);
QPAIR_API qp_status qp_records_save_csv(const qp_records* recs, const char* path);
QPAIR_API qp_status qp_records_save_curve_json(const qp_records* recs, char fixed_arm,
                                               const char* path);

/* Plottable theta/rate/error CSV.  fixed_arm: "A", "B" or "auto". */
QPAIR_API qp_status qp_records_save_curve_csv(const qp_records* recs, const char* fixed_arm,
                                              const char* path);
QPAIR_API qp_status qp_records_size(const qp_records* recs, size_t* out);
QPAIR_API void qp_records_free(qp_records* recs);

/* ---- simulation -------------------------------------------------------- */

/* angles: {alpha, alpha', beta, beta'}; 16 records, one per analyzer pair. */
QPAIR_API qp_status qp_simulate_chsh(const qp_state* st, const qp_source* src,
                                     const double angles[4], double duration_s, uint64_t seed,
                                     qp_records** out);
QPAIR_API qp_status qp_simulate_tomo(const qp_state* st, const qp_source* src,
                                     const char* set_name, double duration_s, uint64_t seed,
                                     qp_records** out);
QPAIR_API qp_status qp_simulate_curve(const qp_state* st, const qp_source* src, char fixed_arm,
                                      double fixed_angle_deg, int points, double span_deg,
                                      double duration_s, uint64_t seed, qp_records** out);

/* ---- analysis ---------------------------------------------------------- */

/* Visibility of a correlation curve (min/max and sinusoid fit, Poisson and
 * bootstrap errors).  fixed_arm: "A", "B" or "auto". */
QPAIR_API qp_status qp_visibility_json(const qp_records* recs, const char* fixed_arm,
                                       int bootstrap_trials, uint64_t seed, char** json_out);

/* Bell-CHSH analysis of 16 records; mc_trials >= 100 adds the Monte-Carlo
 * error cross-check. */
QPAIR_API qp_status qp_chsh_json(const qp_records* recs, const double angles[4], int mc_trials,
                                 uint64_t seed, int threads, char** json_out);

/* Ideal (probability-level) CHSH parameter of a state. */
QPAIR_API qp_status qp_ideal_s(const qp_state* st, const double angles[4], double* out);

/* Maximum-likelihood reconstruction.  set_name: "james16" | "full36";
 * likelihood: "poisson" | "gaussian". */
QPAIR_API qp_status qp_tomography(const qp_records* recs, const char* set_name,
                                  const char* likelihood, qp_tomo** out);
QPAIR_API qp_status qp_tomo_state(const qp_tomo* t, qp_state** out);
QPAIR_API qp_status qp_tomo_report_json(const qp_tomo* t, const qp_state* target,
                                        const char* target_name, char** json_out);
QPAIR_API void qp_tomo_free(qp_tomo* t);

/* ---- full pipeline ------------------------------------------------------ */

/* Bundle config -> characterization report JSON.  stamp != 0 adds a
 * wall-clock timestamp to provenance (otherwise runs are byte-identical for
 * fixed inputs and seed). */
QPAIR_API qp_status qp_report_all(const char* config_path, uint64_t seed, int threads, int stamp,
                                  char** json_out);

/* Human-readable rendering of a report's summary table. */
QPAIR_API qp_status qp_report_render_text(const char* report_json, char** text_out);

#ifdef __cplusplus
}
#endif

#endif /* QPAIR_H */
