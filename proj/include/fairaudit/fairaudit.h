/* fairaudit — fairness auditing for occluded face verification.
 *
 * C API of the shared library. All functions returning fa_status set a
 * thread-local error message retrievable with fa_last_error() on failure.
 * Handles are opaque; every fa_*_new/load/compute function that yields a
 * handle has a matching fa_*_free. Passing NULL handles is a usage error
 * and returns FA_EINVAL.
 */

#ifndef FAIRAUDIT_H
#define FAIRAUDIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define FA_API __declspec(dllexport)
#else
#  define FA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fa_status {
  FA_OK = 0,
  FA_ERROR = 1,              /* internal / unclassified */
  FA_EINVAL = 2,             /* invalid argument or parameter */
  FA_EIO = 3,                /* filesystem failure */
  FA_EPARSE = 4,             /* malformed input file */
  FA_EDEGENERATE_GROUP = 5,  /* group lacks genuine or impostor pairs */
  FA_EUNDEFINED_METRIC = 6,  /* metric undefined for these inputs */
  FA_EINSUFFICIENT_DATA = 7, /* too few groups or samples */
  FA_ESHAPE = 8,             /* raster dimension mismatch */
  FA_EMISSING_ASSET = 9      /* occlusion category has no assets */
} fa_status;

FA_API const char* fa_version(void);

/* Message describing the most recent failure on this thread. Valid until the
 * next failing fa_* call on the same thread. Never NULL. */
FA_API const char* fa_last_error(void);

/* -------------------------------------------------------------------------
 * Verification pair datasets
 * ------------------------------------------------------------------------- */

typedef struct fa_dataset fa_dataset;

/* Loads a pair CSV: header `pair_id,score,ground_truth,group`, ground_truth
 * in {genuine, impostor} (case-insensitive). Malformed rows fail with a
 * line-numbered FA_EPARSE. */
FA_API fa_status fa_dataset_load(const char* pairs_csv_path, fa_dataset** out);
FA_API void fa_dataset_free(fa_dataset* dataset);

FA_API size_t fa_dataset_size(const fa_dataset* dataset);
FA_API size_t fa_dataset_group_count(const fa_dataset* dataset);
/* Group names are sorted and index-stable; NULL when index is out of range. */
FA_API const char* fa_dataset_group_name(const fa_dataset* dataset, size_t index);

/* -------------------------------------------------------------------------
 * Threshold selection
 * ------------------------------------------------------------------------- */

typedef struct fa_threshold_result fa_threshold_result;

/* Maximizes overall accuracy minus the population standard deviation of
 * per-group accuracies over the midpoint candidate grid (midpoints between
 * consecutive distinct scores plus one point below the minimum and one above
 * the maximum). Smallest maximizer wins ties. */
FA_API fa_status fa_optimize_threshold(const fa_dataset* dataset,
                                       fa_threshold_result** out);
FA_API void fa_threshold_result_free(fa_threshold_result* result);

FA_API double fa_threshold_value(const fa_threshold_result* result);
FA_API double fa_threshold_objective(const fa_threshold_result* result);
FA_API double fa_threshold_overall_accuracy(const fa_threshold_result* result);

/* -------------------------------------------------------------------------
 * Fairness reports
 * ------------------------------------------------------------------------- */

typedef struct fa_report fa_report;

typedef enum fa_metric {
  FA_METRIC_STD_ACCURACY = 0, /* percentage points */
  FA_METRIC_SER = 1,
  FA_METRIC_FDR = 2,
  FA_METRIC_IR = 3,
  FA_METRIC_GARBE = 4,
  FA_METRIC_DP_DIFFERENCE = 5,
  FA_METRIC_EO_DIFFERENCE = 6,
  FA_METRIC_DELTA_FMR = 7,
  FA_METRIC_MAD_FMR = 8,
  FA_METRIC_DELTA_FNMR = 9,
  FA_METRIC_MAD_FNMR = 10,
  FA_METRIC_DELTA_ERR = 11 /* percentage points */
} fa_metric;

typedef enum fa_rate {
  FA_RATE_ACCURACY = 0,
  FA_RATE_FMR = 1,
  FA_RATE_FNMR = 2,
  FA_RATE_TPR = 3,
  FA_RATE_FPR = 4,
  FA_RATE_SELECTION = 5,
  FA_RATE_N_GENUINE = 6,
  FA_RATE_N_IMPOSTOR = 7
} fa_rate;

/* Computes per-group rates and the full metric suite at `threshold`.
 * `alpha` weights FDR/IR/GARBE. Fails with FA_EDEGENERATE_GROUP when a group
 * lacks genuine or impostor pairs. Metrics that are undefined for the inputs
 * (single group, zero minimum rate, zero group error) are recorded as
 * undefined in the report, not as an evaluation failure. */
FA_API fa_status fa_evaluate(const fa_dataset* dataset, double threshold,
                             double alpha, fa_report** out);
FA_API void fa_report_free(fa_report* report);

FA_API double fa_report_threshold(const fa_report* report);
FA_API double fa_report_alpha(const fa_report* report);
FA_API double fa_report_overall_accuracy(const fa_report* report);

/* FA_EUNDEFINED_METRIC when the metric is undefined; fa_last_error() then
 * carries the reason. */
FA_API fa_status fa_report_metric(const fa_report* report, fa_metric metric,
                                  double* out);

FA_API size_t fa_report_group_count(const fa_report* report);
FA_API const char* fa_report_group_name(const fa_report* report, size_t index);
FA_API fa_status fa_report_group_rate(const fa_report* report, size_t index,
                                      fa_rate rate, double* out);

FA_API fa_status fa_report_save_json(const fa_report* report, const char* path);
FA_API fa_status fa_report_load_json(const char* path, fa_report** out);

/* Renders the report as text tables; with a non-NULL baseline the rendering
 * includes signed percent changes and fairer/unfairer annotations per metric.
 * The returned string is owned by the caller; release with fa_string_free. */
FA_API fa_status fa_report_render(const fa_report* report,
                                  const fa_report* baseline_or_null,
                                  char** out_text);
FA_API void fa_string_free(char* text);

/* -------------------------------------------------------------------------
 * Run-level commands (the CLI binds these 1:1)
 * ------------------------------------------------------------------------- */

typedef enum fa_threshold_mode {
  FA_THRESHOLD_OPTIMIZE_BASELINE = 0,
  FA_THRESHOLD_OPTIMIZE_PER_PROTOCOL = 1,
  FA_THRESHOLD_FIXED = 2
} fa_threshold_mode;

typedef struct fa_occlude_options {
  const char* images_dir;    /* <image_id>.png per landmarks row */
  const char* landmarks_csv; /* image_id,le_x,le_y,re_x,re_y,n_x,n_y,lm_x,lm_y,rm_x,rm_y */
  const char* assets_dir;    /* <id>.png + <id>.json sidecars */
  int protocol;              /* 1 or 4 */
  uint64_t seed;
  double opacity_threshold;  /* <= 0 selects the default 0.5 */
  const char* out_dir;
} fa_occlude_options;

/* Writes occluded images, aligned binary masks and a provenance manifest.
 * Deterministic for a fixed seed: reruns are byte-identical apart from the
 * manifest's created_at field. */
FA_API fa_status fa_run_occlude(const fa_occlude_options* options);

typedef struct fa_evaluate_options {
  const char* pairs_csv;
  double alpha;                /* < 0 selects the default 0.5 */
  fa_threshold_mode threshold_mode;
  double fixed_threshold;      /* used by FA_THRESHOLD_FIXED */
  const char* baseline_report; /* optional baseline report.json */
  const char* out_dir;
} fa_evaluate_options;

FA_API fa_status fa_run_evaluate(const fa_evaluate_options* options);

typedef struct fa_foir_options {
  const char* pairs_csv;
  const char* manifest_csv;    /* pair_id,saliency_path,mask_path */
  double fraction;             /* importance fraction; <= 0 selects 0.6 */
  double threshold;            /* used when threshold_report is NULL */
  const char* threshold_report;/* report.json supplying the threshold */
  double significance;         /* ANOVA level; <= 0 selects 0.05 */
  const char* out_dir;
} fa_foir_options;

FA_API fa_status fa_run_foir(const fa_foir_options* options);

/* Renders previously written reports. baseline/foir paths may be NULL; when
 * out_dir is NULL the rendering goes to stdout only. */
FA_API fa_status fa_run_report(const char* report_json,
                               const char* baseline_json_or_null,
                               const char* foir_json_or_null,
                               const char* out_dir_or_null);

#ifdef __cplusplus
}
#endif

#endif /* FAIRAUDIT_H */
