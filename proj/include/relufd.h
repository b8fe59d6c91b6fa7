#ifndef RELUFD_H
#define RELUFD_H

/* C interface to the relufd library: functional-dimension estimation,
 * activation-region geometry, hidden-symmetry detection, and the
 * no-hidden-symmetry construction for ReLU networks.
 *
 * All functions return rf_status; on failure rf_last_error() describes the
 * problem for the calling thread.  Strings returned through char** are
 * heap-allocated and must be released with rf_string_free(). */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct rf_net rf_net;

typedef enum {
    RF_OK = 0,
    RF_ERR_INVALID_ARGUMENT = 1,
    RF_ERR_PARSE = 2,
    RF_ERR_IO = 3,
    RF_ERR_UNSUPPORTED = 4,
    RF_ERR_RUNTIME = 5
} rf_status;

const char* rf_last_error(void);
void rf_string_free(char* s);
void rf_net_free(rf_net* net);

/* --- networks ----------------------------------------------------------- */

rf_status rf_net_from_json(const char* text, rf_net** out);
rf_status rf_net_to_json(const rf_net* net, char** out);
rf_status rf_net_load(const char* path, rf_net** out);
rf_status rf_net_save(const rf_net* net, const char* path);

/* widths has n entries (n0..nd); bias_std < 0 selects the default (0.1). */
rf_status rf_net_he_init(const int* widths, int n, uint64_t seed, double bias_std,
                         rf_net** out);

/* *n is in/out: capacity of widths on entry, count on exit. */
rf_status rf_net_arch(const rf_net* net, int* widths, int* n);
rf_status rf_param_count(const rf_net* net, long long* out);
rf_status rf_fdim_upper_bound(const int* widths, int n, long long* out);
rf_status rf_forward(const rf_net* net, const double* x, int nx, double* y, int ny);

/* --- functional dimension ----------------------------------------------- */

/* result JSON: {rank, m, tolerance, upper_bound, attained_max, resamples,
 * wall_ms}. rel_tol <= 0 selects the default (1e-6). */
rf_status rf_estimate_fdim(const rf_net* net, int m_multiplier, uint64_t seed,
                           double rel_tol, char** result_json);

/* config JSON: {"depths":[...],"widths":[...],"mode":"input-equals-width"|
 * "fixed-input","input":N,"architectures":[[...],...],"trials":N,
 * "m_multiplier":N,"rel_tol":x,"seed":N,"threads":N,"out_dir":"..."}.
 * Explicit architectures override the depth/width generators.  Writes
 * per-trial CSV, summary JSON and histogram SVGs under out_dir (resumable)
 * and returns the summary JSON. */
rf_status rf_sweep(const char* config_json, char** result_json);

/* config JSON: {"arch":[...],"multipliers":[...],"trials":N,"seed":N,
 * "rel_tol":x,"threads":N}; result: {multipliers, fraction_at_max}. */
rf_status rf_m_sensitivity(const char* config_json, char** result_json);

/* Histogram mode analysis of one architecture of a sweep summary. */
rf_status rf_mode_gap(const char* summary_json, const int* widths, int n,
                      char** result_json);

/* --- geometry ------------------------------------------------------------ */

/* bbox_radius <= 0 selects the default ([-10,10]^n0).  svg_path may be NULL
 * (n0 = 2 only).  Returns regions, bent-hyperplane curve count, TPIC and
 * LRA reports as JSON. */
rf_status rf_geometry(const rf_net* net, double bbox_radius, const char* svg_path,
                      char** report_json);

/* --- symmetries ---------------------------------------------------------- */

rf_status rf_mechanisms(const rf_net* net, uint64_t seed, char** report_json);

/* --- construction -------------------------------------------------------- */

rf_status rf_construct(const int* widths, int n, uint64_t seed, rf_net** out,
                       char** state_json);
rf_status rf_verify(const rf_net* net, uint64_t seed, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* RELUFD_H */
