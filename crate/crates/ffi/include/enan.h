#ifndef ENAN_H
#define ENAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every fallible call.
 */
typedef enum EnanStatus {
  ENAN_STATUS_OK = 0,
  ENAN_STATUS_NULL_POINTER = 1,
  ENAN_STATUS_INVALID_ARGUMENT = 2,
  ENAN_STATUS_IO = 3,
  ENAN_STATUS_PARSE = 4,
  ENAN_STATUS_DIMENSION_MISMATCH = 5,
  ENAN_STATUS_TOO_FEW_POINTS = 6,
  ENAN_STATUS_MODEL_FORMAT = 7,
  /*
   The model kind does not support the request.
   */
  ENAN_STATUS_UNSUPPORTED = 8,
  ENAN_STATUS_PANIC = 9,
} EnanStatus;

/*
 Labeled training data.
 */
typedef struct EnanDataset EnanDataset;

/*
 A trained classifier together with the scaling applied to its inputs.
 */
typedef struct EnanModel EnanModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null after a
 successful call. Valid until the next `enan_*` call on the same thread.
 */
const char *enan_last_error_message(void);

/*
 Loads a CSV file whose last column is the class label.

 # Safety
 `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum EnanStatus enan_dataset_load_csv(const char *path, bool has_header, struct EnanDataset **out);

/*
 Builds a dataset from `n_points` row-major points of dimension `dim` and
 their labels in `0..n_classes`. Classes are named by their index.

 # Safety
 `values` must hold `n_points * dim` doubles, `labels` `n_points` entries,
 and `out` must be a valid pointer.
 */
enum EnanStatus enan_dataset_from_arrays(const double *values,
                                         const uint32_t *labels,
                                         size_t n_points,
                                         size_t dim,
                                         size_t n_classes,
                                         struct EnanDataset **out);

/*
 Number of points, or 0 for a null handle.

 # Safety
 `dataset` must be null or a live handle.
 */
size_t enan_dataset_len(const struct EnanDataset *dataset);

/*
 Feature dimension, or 0 for a null handle.

 # Safety
 `dataset` must be null or a live handle.
 */
size_t enan_dataset_dim(const struct EnanDataset *dataset);

/*
 # Safety
 `dataset` must be null or a handle not yet freed.
 */
void enan_dataset_free(struct EnanDataset *dataset);

/*
 Trains ENaN, which picks each query's neighborhood size itself. With
 `normalize`, features are min-max scaled and queries are scaled the same
 way at prediction time.

 # Safety
 `dataset` must be a live handle and `out` a valid pointer.
 */
enum EnanStatus enan_train_enan(const struct EnanDataset *dataset,
                                bool normalize,
                                struct EnanModel **out);

/*
 Trains ENN with a fixed neighborhood size `k`.

 # Safety
 `dataset` must be a live handle and `out` a valid pointer.
 */
enum EnanStatus enan_train_enn(const struct EnanDataset *dataset,
                               size_t k,
                               bool normalize,
                               struct EnanModel **out);

/*
 Neighborhood size chosen by training. Only ENaN models have one.

 # Safety
 `model` must be a live handle and `out` a valid pointer.
 */
enum EnanStatus enan_model_lambda(const struct EnanModel *model, size_t *out);

/*
 Feature dimension, or 0 for a null handle.

 # Safety
 `model` must be null or a live handle.
 */
size_t enan_model_dim(const struct EnanModel *model);

/*
 Number of classes, or 0 for a null handle.

 # Safety
 `model` must be null or a live handle.
 */
size_t enan_model_n_classes(const struct EnanModel *model);

/*
 Copies the NUL-terminated name of `class` into `buf`. Fails with
 `INVALID_ARGUMENT` if `buf_len` is too small; `needed` (optional)
 receives the required size including the terminator.

 # Safety
 `model` must be a live handle, `buf` must hold `buf_len` bytes, and
 `needed` must be null or valid.
 */
enum EnanStatus enan_model_class_name(const struct EnanModel *model,
                                      size_t class_,
                                      char *buf,
                                      size_t buf_len,
                                      size_t *needed);

/*
 Predicts class indices for `n_queries` row-major raw queries into
 `labels_out`.

 # Safety
 `queries` must hold `n_queries * enan_model_dim(model)` doubles and
 `labels_out` room for `n_queries` entries.
 */
enum EnanStatus enan_model_predict(const struct EnanModel *model,
                                   const double *queries,
                                   size_t n_queries,
                                   uint32_t *labels_out);

/*
 Writes the model to a text file.

 # Safety
 `model` must be a live handle and `path` a NUL-terminated string.
 */
enum EnanStatus enan_model_save(const struct EnanModel *model, const char *path);

/*
 Reads a model written by `enan_model_save` or the `enan train` command.

 # Safety
 `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum EnanStatus enan_model_load(const char *path, struct EnanModel **out);

/*
 # Safety
 `model` must be null or a handle not yet freed.
 */
void enan_model_free(struct EnanModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENAN_H */
