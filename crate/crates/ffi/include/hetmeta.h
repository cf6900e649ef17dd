#ifndef HETMETA_H
#define HETMETA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define HETMETA_KIND_MEAN 0

#define HETMETA_KIND_MD 1

#define HETMETA_KIND_SMD 2

#define HETMETA_SMD_HEDGES 0

#define HETMETA_SMD_COHEN 1

#define HETMETA_STAT_I2 0

#define HETMETA_STAT_I2_A 1

#define HETMETA_STAT_I2_ANOVA 2

typedef enum HetmetaStatus {
  HETMETA_STATUS_OK = 0,
  HETMETA_STATUS_NULL_POINTER = 1,
  HETMETA_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Input rejected: parse, schema or validation failure.
   */
  HETMETA_STATUS_INPUT_ERROR = 3,
  /**
   * Statistic undefined for otherwise valid input.
   */
  HETMETA_STATUS_COMPUTE_ERROR = 4,
  HETMETA_STATUS_PANIC = 5,
} HetmetaStatus;

/**
 * Opaque validated dataset.
 */
typedef struct HetmetaDataset HetmetaDataset;

/**
 * Opaque set of Monte Carlo results, one per grid point.
 */
typedef struct HetmetaSimResult HetmetaSimResult;

/**
 * Heterogeneity panel of a dataset. Undefined raw ratios are NaN.
 */
typedef struct HetmetaPanel {
  uint32_t kind;
  size_t k;
  double sum_w;
  double sum_w2;
  double sum_wy;
  double weighted_mean;
  double q;
  double tau2_dl_raw;
  double tau2_dl;
  double sigma_tilde2;
  double n_tilde;
  /**
   * n~ for mean and MD, w~ for SMD.
   */
  double adjustment;
  /**
   * Nonzero when `adjustment` is the adjusted mean weight w~.
   */
  int adjustment_is_weight;
  double i2_raw;
  double i2;
  double i2_a_raw;
  double i2_a;
  double size_weighted_mean;
  double msb;
  double msw;
  double i2_anova_raw;
  double i2_anova;
} HetmetaPanel;

typedef struct HetmetaBoxSummary {
  uint32_t n_base;
  size_t count;
  double mean;
  double min;
  double q1;
  double median;
  double q3;
  double max;
  double lo_whisker;
  double hi_whisker;
  double icc_ma_true;
} HetmetaBoxSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *hetmeta_version(void);

/**
 * Message of the last error on this thread, or null. Valid until the next
 * failing call on the same thread.
 */
const char *hetmeta_last_error_message(void);

/**
 * Stable code (for example `model.invalid_variance`) of the last error on
 * this thread, or null.
 */
const char *hetmeta_last_error_code(void);

/**
 * Builds a dataset of means from `k` studies.
 *
 * # Safety
 * The arrays must hold `k` values each; `out` must be writable.
 */
enum HetmetaStatus hetmeta_dataset_new_mean(const double *y,
                                            const double *var_y,
                                            const uint32_t *n,
                                            size_t k,
                                            struct HetmetaDataset **out);

/**
 * Builds an MD or SMD dataset from `k` two-arm summaries.
 *
 * # Safety
 * The arrays must hold `k` values each; `out` must be writable.
 */
enum HetmetaStatus hetmeta_dataset_new_two_arm(const double *y_t,
                                               const double *se_t,
                                               const uint32_t *n_t,
                                               const double *y_c,
                                               const double *se_c,
                                               const uint32_t *n_c,
                                               size_t k,
                                               uint32_t kind,
                                               uint32_t smd_method,
                                               struct HetmetaDataset **out);

/**
 * Reads a CSV file in the one-arm (`kind` mean) or two-arm layout.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out` must be writable.
 */
enum HetmetaStatus hetmeta_dataset_from_csv(const char *path,
                                            uint32_t kind,
                                            uint32_t smd_method,
                                            struct HetmetaDataset **out);

/**
 * Number of studies, or 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t hetmeta_dataset_k(const struct HetmetaDataset *ds);

/**
 * # Safety
 * `ds` must be null or a handle not yet freed.
 */
void hetmeta_dataset_free(struct HetmetaDataset *ds);

/**
 * Computes every statistic of the dataset.
 *
 * # Safety
 * `ds` must be a live handle; `out` must be writable.
 */
enum HetmetaStatus hetmeta_panel(const struct HetmetaDataset *ds, struct HetmetaPanel *out);

/**
 * Full JSON report of the dataset, labelled with `source`. Free the result
 * with [`hetmeta_string_free`].
 *
 * # Safety
 * `ds` must be a live handle, `source` null or nul-terminated, `out`
 * writable.
 */
enum HetmetaStatus hetmeta_report_json(const struct HetmetaDataset *ds,
                                       const char *source,
                                       char **out);

/**
 * `max{(Q - (k - 1)) / Q, 0}`.
 *
 * # Safety
 * `out` must be writable.
 */
enum HetmetaStatus hetmeta_i_squared(double q, size_t k, double *out);

/**
 * I²_A from Q and the adjusted mean size (n~, or w~ for SMD).
 *
 * # Safety
 * `out` must be writable.
 */
enum HetmetaStatus hetmeta_i_squared_a(double q, size_t k, double n_tilde, double *out);

/**
 * `max{(MSB - MSW) / (MSB + (n~ - 1) MSW), 0}`.
 *
 * # Safety
 * `out` must be writable.
 */
enum HetmetaStatus hetmeta_i_squared_anova(double msb, double msw, double n_tilde, double *out);

/**
 * `tau2 / (tau2 + sigma_y2)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum HetmetaStatus hetmeta_icc_ht(double tau2, double sigma_y2, double *out);

/**
 * `tau2 / (tau2 + sigma2_pop)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum HetmetaStatus hetmeta_icc_ma(double tau2, double sigma2_pop, double *out);

/**
 * Adjusted mean of `k` sizes (or weights).
 *
 * # Safety
 * `n` must hold `k` values; `out` must be writable.
 */
enum HetmetaStatus hetmeta_adjusted_mean_n(const double *n, size_t k, double *out);

/**
 * Runs the Monte Carlo scenario given as TOML text on `threads` workers
 * (0 uses the default pool).
 *
 * # Safety
 * `config_toml` must be nul-terminated; `out` must be writable.
 */
enum HetmetaStatus hetmeta_simulate(const char *config_toml,
                                    size_t threads,
                                    struct HetmetaSimResult **out);

/**
 * Number of grid points, or 0 for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t hetmeta_sim_result_len(const struct HetmetaSimResult *r);

/**
 * Boxplot summary of `statistic` at grid point `index`.
 *
 * # Safety
 * `r` must be a live handle; `out` must be writable.
 */
enum HetmetaStatus hetmeta_sim_result_summary(const struct HetmetaSimResult *r,
                                              size_t index,
                                              uint32_t statistic,
                                              struct HetmetaBoxSummary *out);

/**
 * Summary CSV as written by `hetmeta simulate`. Free the result with
 * [`hetmeta_string_free`].
 *
 * # Safety
 * `r` must be a live handle; `out` must be writable.
 */
enum HetmetaStatus hetmeta_sim_result_csv(const struct HetmetaSimResult *r, char **out);

/**
 * # Safety
 * `r` must be null or a handle not yet freed.
 */
void hetmeta_sim_result_free(struct HetmetaSimResult *r);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void hetmeta_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HETMETA_H */
