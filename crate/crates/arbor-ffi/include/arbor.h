/* arbor C API. Generated by cbindgen from arbor-ffi; do not edit. */

#ifndef ARBOR_H
#define ARBOR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. Mirrors the CLI exit codes.
 */
typedef enum ArborStatus {
  ARBOR_STATUS_OK = 0,
  /**
   * Null pointer, bad argument, or undersized buffer.
   */
  ARBOR_STATUS_USAGE = 1,
  /**
   * Input data could not be ingested or partitioned.
   */
  ARBOR_STATUS_DATA = 2,
  /**
   * Model file missing, malformed, or incompatible.
   */
  ARBOR_STATUS_MODEL = 3,
  /**
   * An internal panic was caught; state may be stale but memory is safe.
   */
  ARBOR_STATUS_PANIC = 4,
} ArborStatus;

typedef enum ArborTask {
  ARBOR_TASK_CLASSIFICATION = 0,
  ARBOR_TASK_REGRESSION = 1,
} ArborTask;

typedef enum ArborCriterion {
  ARBOR_CRITERION_INFO_GAIN = 0,
  ARBOR_CRITERION_GINI = 1,
} ArborCriterion;

typedef enum ArborMetricKind {
  ARBOR_METRIC_KIND_ACCURACY = 0,
  ARBOR_METRIC_KIND_MAE = 1,
  ARBOR_METRIC_KIND_RMSE = 2,
} ArborMetricKind;

/**
 * Opaque parsed dataset.
 */
typedef struct ArborDataset ArborDataset;

/**
 * Opaque trained model.
 */
typedef struct ArborModel ArborModel;

/**
 * Summary filled by [`arbor_tune`].
 */
typedef struct ArborTuneInfo {
  size_t full_nodes;
  size_t full_depth;
  size_t best_depth_max;
  size_t best_split_min;
  size_t configs_evaluated;
  size_t tuned_nodes;
  size_t tuned_depth;
  /**
   * Metric used on the validation and test sets.
   */
  enum ArborMetricKind metric;
  double validation_metric;
  double test_metric;
} ArborTuneInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string.
 */
const char *arbor_version(void);

/**
 * Message of the last failure on this thread. Valid until the thread's next
 * call into the library. Never null.
 */
const char *arbor_last_error(void);

/**
 * Parses a CSV file (header row mandatory) into a dataset handle.
 */
enum ArborStatus arbor_dataset_from_csv(const char *path,
                                        const char *label_column,
                                        enum ArborTask task,
                                        struct ArborDataset **out);

/**
 * Parses an in-memory CSV buffer into a dataset handle.
 */
enum ArborStatus arbor_dataset_from_buffer(const uint8_t *bytes,
                                           size_t len,
                                           const char *label_column,
                                           enum ArborTask task,
                                           struct ArborDataset **out);

/**
 * Number of examples; 0 for a null handle.
 */
size_t arbor_dataset_rows(const struct ArborDataset *dataset);

/**
 * Number of feature columns; 0 for a null handle.
 */
size_t arbor_dataset_features(const struct ArborDataset *dataset);

/**
 * Releases a dataset handle. Null is fine.
 */
void arbor_dataset_free(struct ArborDataset *dataset);

/**
 * Trains a tree on the whole dataset. `depth_max` 0 means unlimited; nodes
 * with fewer than `split_min` examples stay leaves.
 */
enum ArborStatus arbor_train(const struct ArborDataset *dataset,
                             enum ArborCriterion criterion,
                             size_t depth_max,
                             size_t split_min,
                             struct ArborModel **out);

/**
 * Full pipeline: partition into train/validation/test by `seed`, train the
 * unrestricted tree, sweep hyper-parameters on the validation set, prune,
 * and evaluate on the test set. `info` may be null.
 */
enum ArborStatus arbor_tune(const struct ArborDataset *dataset,
                            enum ArborCriterion criterion,
                            double train_fraction,
                            double valid_fraction,
                            double test_fraction,
                            uint64_t seed,
                            struct ArborModel **out,
                            struct ArborTuneInfo *info);

/**
 * Writes the model as a versioned JSON document.
 */
enum ArborStatus arbor_model_save(const struct ArborModel *model, const char *path);

/**
 * Loads a model written by [`arbor_model_save`] or the CLI.
 */
enum ArborStatus arbor_model_load(const char *path, struct ArborModel **out);

/**
 * Node count of the model's tree; 0 for a null handle.
 */
size_t arbor_model_nodes(const struct ArborModel *model);

/**
 * Depth of the model's tree; 0 for a null handle.
 */
size_t arbor_model_depth(const struct ArborModel *model);

/**
 * Number of feature columns the model expects; 0 for a null handle.
 */
size_t arbor_model_features(const struct ArborModel *model);

/**
 * Predicts one row. `cells` are raw strings in the model's feature order,
 * parsed with the CSV cell rules (number first, categorical on failure,
 * empty/`?`/`NA` missing). The label (class name or numeric value) is
 * written NUL-terminated into `out`.
 */
enum ArborStatus arbor_model_predict_row(const struct ArborModel *model,
                                         const char *const *cells,
                                         size_t n_cells,
                                         char *out,
                                         size_t out_len);

/**
 * Releases a model handle. Null is fine.
 */
void arbor_model_free(struct ArborModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ARBOR_H */
