#ifndef GAMMA_MODELS_H
#define GAMMA_MODELS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/*
 Status codes. Values 1 to 25 mirror the library error codes.
 */
typedef enum GmStatus {
  GM_STATUS_OK = 0,
  GM_STATUS_NON_FINITE = 1,
  GM_STATUS_ARITY_TOO_SMALL = 2,
  GM_STATUS_ARITY_MISMATCH = 3,
  GM_STATUS_DIMENSION_MISMATCH = 4,
  GM_STATUS_INVALID_PARAMETER = 5,
  GM_STATUS_SAMPLE_BUDGET_EXCEEDED = 6,
  GM_STATUS_NON_COMMUTING = 7,
  GM_STATUS_TRIANGULARIZATION_FAILED = 8,
  GM_STATUS_NOT_A_CONTRACTION = 9,
  GM_STATUS_NOT_UNITARY = 10,
  GM_STATUS_SPECTRUM_OUTSIDE_DOMAIN = 11,
  GM_STATUS_RESIDUAL_TOO_LARGE = 12,
  GM_STATUS_COMMUTATIVITY_FAILED = 13,
  GM_STATUS_NOT_AN_ISOMETRY = 14,
  GM_STATUS_TRUNCATION_HORIZON_TOO_SMALL = 15,
  GM_STATUS_ITERATION_DIVERGENCE = 16,
  GM_STATUS_ILL_DEFINED_QUOTIENT = 17,
  GM_STATUS_TRUNCATION_INSUFFICIENT = 18,
  GM_STATUS_EVALUATION_SINGULAR = 19,
  GM_STATUS_NOT_CNU = 20,
  GM_STATUS_GRID_INADEQUATE = 21,
  GM_STATUS_NOT_MINIMAL = 22,
  GM_STATUS_ILL_CONDITIONED_GRAM = 23,
  GM_STATUS_PARSE = 24,
  GM_STATUS_IO = 25,
  GM_STATUS_NULL_POINTER = 100,
  GM_STATUS_INVALID_UTF8 = 101,
  GM_STATUS_PANIC = 102,
} GmStatus;

/*
 Class labels returned by [`gm_certify`].
 */
typedef enum GmClassLabel {
  GM_CLASS_LABEL_CONTRACTION = 0,
  GM_CLASS_LABEL_ISOMETRY = 1,
  GM_CLASS_LABEL_UNITARY = 2,
  GM_CLASS_LABEL_CO_ISOMETRY = 3,
  GM_CLASS_LABEL_PURE_ISOMETRY = 4,
  GM_CLASS_LABEL_REFUTED = 5,
} GmClassLabel;

typedef enum GmWhich {
  GM_WHICH_FORWARD = 0,
  GM_WHICH_ADJOINT = 1,
} GmWhich;

typedef enum GmModelKind {
  GM_MODEL_KIND_DOUGLAS = 0,
  GM_MODEL_KIND_NAGY_FOIAS = 1,
  GM_MODEL_KIND_SCHAFFER = 2,
} GmModelKind;

/*
 Opaque dilation model.
 */
typedef struct GmModel GmModel;

/*
 Opaque commuting operator tuple.
 */
typedef struct GmTuple GmTuple;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. Owned by the library.
 */
const char *gm_last_error_message(void);

/*
 Stable snake_case name of a status code. Static storage.
 */
const char *gm_status_name(enum GmStatus status);

/*
 Builds a tuple from `n` row-major `dim × dim` matrices stored as interleaved
 `(re, im)` doubles: `data` holds `n·dim·dim·2` values.

 # Safety
 `data` must point to that many doubles and `out` must be writable.
 */
enum GmStatus gm_tuple_new(size_t n, size_t dim, const double *data, struct GmTuple **out);

/*
 Parses a tuple document (or a dilation model, taking its model tuple).

 # Safety
 `json` must be a NUL-terminated string and `out` writable.
 */
enum GmStatus gm_tuple_from_json(const char *json, struct GmTuple **out);

/*
 # Safety
 `t` must come from this library and not be used afterwards. NULL is ignored.
 */
void gm_tuple_free(struct GmTuple *t);

/*
 # Safety
 `t` must be a valid handle or NULL (returns 0).
 */
size_t gm_tuple_arity(const struct GmTuple *t);

/*
 # Safety
 `t` must be a valid handle or NULL (returns 0).
 */
size_t gm_tuple_dim(const struct GmTuple *t);

/*
 Copies the 1-based `index`-th operator into `out` (`dim·dim·2` doubles, row-major, interleaved).

 # Safety
 `out` must hold `dim·dim·2` doubles.
 */
enum GmStatus gm_tuple_get(const struct GmTuple *t, size_t index, double *out);

/*
 Tuple document JSON.

 # Safety
 `t` valid, `out` writable; free the string with [`gm_string_free`].
 */
enum GmStatus gm_tuple_to_json(const struct GmTuple *t, char **out);

/*
 Certifies the finest Γₙ-class; `json_out` may be NULL.

 # Safety
 `t` valid, `label` writable.
 */
enum GmStatus gm_certify(const struct GmTuple *t,
                         double tol,
                         uint64_t seed,
                         enum GmClassLabel *label,
                         char **json_out);

/*
 Fundamental operators with both solver paths compared.

 # Safety
 `t` valid, `json_out` writable.
 */
enum GmStatus gm_fundamental(const struct GmTuple *t,
                             enum GmWhich which,
                             double tol,
                             char **json_out);

/*
 # Safety
 `t` valid, `json_out` writable.
 */
enum GmStatus gm_wold(const struct GmTuple *t, double tol, char **json_out);

/*
 Canonical Γₙ-unitary; `max_iter = 0` selects the default cap.

 # Safety
 `t` valid, `json_out` writable.
 */
enum GmStatus gm_canonical(const struct GmTuple *t, size_t max_iter, char **json_out);

/*
 Builds a dilation model of the given kind with truncation degree `degree` and grid `grid`.

 # Safety
 `t` valid, `out` writable; release with [`gm_model_free`].
 */
enum GmStatus gm_dilate(const struct GmTuple *t,
                        enum GmModelKind kind,
                        size_t degree,
                        size_t grid,
                        double tol,
                        struct GmModel **out);

/*
 # Safety
 `m` must come from this library and not be used afterwards. NULL is ignored.
 */
void gm_model_free(struct GmModel *m);

/*
 Dimension of the model space.

 # Safety
 `m` valid or NULL (returns 0).
 */
size_t gm_model_dim(const struct GmModel *m);

/*
 1 when every construction residual is within budget, 0 otherwise (or for NULL).

 # Safety
 `m` valid or NULL.
 */
int32_t gm_model_passed(const struct GmModel *m);

/*
 # Safety
 `m` valid, `json_out` writable.
 */
enum GmStatus gm_model_to_json(const struct GmModel *m, char **json_out);

/*
 # Safety
 `json` NUL-terminated, `out` writable.
 */
enum GmStatus gm_model_from_json(const char *json, struct GmModel **out);

/*
 Word-compression and intertwining report for words up to length `word_len`.

 # Safety
 Handles valid, `json_out` writable.
 */
enum GmStatus gm_verify_model(const struct GmModel *m,
                              const struct GmTuple *t,
                              size_t word_len,
                              double tol,
                              char **json_out);

/*
 Factorization map from `minimal` into `general`.

 # Safety
 Handles valid, `json_out` writable.
 */
enum GmStatus gm_factorize(const struct GmModel *general,
                           const struct GmModel *minimal,
                           double tol,
                           char **json_out);

/*
 Releases a string returned by this library. NULL is ignored.

 # Safety
 `s` must come from this library and not be used afterwards.
 */
void gm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAMMA_MODELS_H */
