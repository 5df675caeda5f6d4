/* C ABI for the fiberforge microfiber modeling library. */

#ifndef FIBERFORGE_H
#define FIBERFORGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of a C API call.
typedef enum FfStatus {
  FF_STATUS_OK = 0,
  // A required pointer argument was null.
  FF_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  FF_STATUS_INVALID_UTF8 = 2,
  // An argument was outside the operation's domain.
  FF_STATUS_INVALID_ARGUMENT = 3,
  FF_STATUS_IO_ERROR = 4,
  // A CSV file failed to parse.
  FF_STATUS_PARSE_ERROR = 5,
  // A model file failed validation.
  FF_STATUS_MODEL_FORMAT_ERROR = 6,
  // The model has the wrong task direction for this call.
  FF_STATUS_TASK_MISMATCH = 7,
  // Training produced a non-finite loss.
  FF_STATUS_NUMERIC_ERROR = 8,
  // A condition cell has no records.
  FF_STATUS_EMPTY_CELL = 9,
} FfStatus;

// Task direction of a model.
typedef enum FfTask {
  FF_TASK_PREDICT = 0,
  FF_TASK_DESIGN = 1,
} FfTask;

// Opaque dataset handle.
typedef struct FfDataset FfDataset;

// Opaque trained-model handle.
typedef struct FfModel FfModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *ff_version(void);

// Message of the most recent failure on this thread (empty string when the
// last call succeeded). The pointer stays valid until the next failing call
// on the same thread.
const char *ff_last_error_message(void);

// Generate a synthetic dataset with `per_cell` records per condition cell.
// On success stores a new handle in `*dataset_out`.
enum FfStatus ff_dataset_generate(uint64_t per_cell, uint64_t seed, struct FfDataset **dataset_out);

// Read a dataset CSV. On success stores a new handle in `*dataset_out`.
enum FfStatus ff_dataset_read_csv(const char *path, struct FfDataset **dataset_out);

// Write a dataset as CSV.
enum FfStatus ff_dataset_write_csv(const struct FfDataset *dataset, const char *path);

// Number of records in a dataset; 0 for a null handle.
uint64_t ff_dataset_len(const struct FfDataset *dataset);

// Uniform random split into `n_model` records and the remainder. On success
// stores two new handles; the input handle stays valid and owned by the
// caller.
enum FfStatus ff_dataset_split(const struct FfDataset *dataset,
                               uint64_t n_model,
                               uint64_t seed,
                               struct FfDataset **model_out,
                               struct FfDataset **holdout_out);

// Destroy a dataset handle. Null is a no-op.
void ff_dataset_free(struct FfDataset *dataset);

// Train one task model on every record of `dataset` with the default
// architecture. `seed` drives weight initialization and training shuffles.
// On success stores a new handle in `*model_out`.
enum FfStatus ff_train(const struct FfDataset *dataset,
                       enum FfTask task,
                       uint32_t batch_size,
                       uint32_t epochs,
                       double learning_rate,
                       uint64_t seed,
                       struct FfModel **model_out);

// Load a model file. On success stores a new handle in `*model_out`.
enum FfStatus ff_model_load(const char *path, struct FfModel **model_out);

// Save a model to a versioned JSON file.
enum FfStatus ff_model_save(const struct FfModel *model, const char *path);

// Task direction of a model, stored in `*task_out`.
enum FfStatus ff_model_task(const struct FfModel *model, enum FfTask *task_out);

// Run a predictive model. `features_out` must point at 4 doubles; they are
// filled with length (um), width (um), porosity (%), Young's modulus (MPa).
enum FfStatus ff_predict_features(const struct FfModel *model,
                                  double sheath_ul_min,
                                  double core_ul_min,
                                  double bath_pct,
                                  double *features_out);

// Run a design model. `params_out` must point at 4 doubles; they are filled
// with sheath flow (uL/min), core flow (uL/min), raw bath output (%), and
// the bath concentration snapped to 0 or 5.
enum FfStatus ff_design_params(const struct FfModel *model,
                               double length_um,
                               double width_um,
                               double porosity_pct,
                               double youngs_mpa,
                               double *params_out);

// Destroy a model handle. Null is a no-op.
void ff_model_free(struct FfModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FIBERFORGE_H */
