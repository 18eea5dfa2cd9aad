#ifndef OPERADFORGE_H
#define OPERADFORGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OfStatus {
  OF_STATUS_OK = 0,
  OF_STATUS_NULL_POINTER = 1,
  OF_STATUS_INVALID_ARGUMENT = 2,
  OF_STATUS_UNKNOWN_CHECK = 3,
  OF_STATUS_INVARIANT_VIOLATED = 4,
  OF_STATUS_NOT_STABLE = 5,
  OF_STATUS_IO = 6,
  OF_STATUS_PANIC = 7,
  OF_STATUS_CHECK_FAILED = 8,
} OfStatus;

typedef enum OfField {
  OF_FIELD_Q = 0,
  OF_FIELD_F2 = 2,
  OF_FIELD_F3 = 3,
  OF_FIELD_F5 = 5,
} OfField;

typedef enum OfSphereModel {
  OF_SPHERE_MODEL_MIN = 0,
  OF_SPHERE_MODEL_CUBE = 1,
} OfSphereModel;

/*
 Opaque `Σ_n`-equivariant chain complex.
 */
typedef struct OfComplex OfComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *of_last_error(void);

/*
 Library version as a static string.
 */
const char *of_version(void);

/*
 `Lie(n)` with its `Σ_n`-action.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum OfStatus of_lie(size_t n, enum OfField field, struct OfComplex **out);

/*
 Reduced chains on the smash power `K^{∧n}` for `space` = `s<k>` or `set:<m>`.

 # Safety
 `space` must be a nul-terminated string and `out` a valid pointer.
 */
enum OfStatus of_smash_power(const char *space,
                             size_t n,
                             enum OfSphereModel model,
                             enum OfField field,
                             struct OfComplex **out);

/*
 Release a handle. Null is ignored.

 # Safety
 `c` must be null or a handle returned by this library, not yet freed.
 */
void of_complex_free(struct OfComplex *c);

/*
 Number of basis cells.

 # Safety
 `c` must be a live handle; `out` a valid pointer.
 */
enum OfStatus of_complex_dim(const struct OfComplex *c, size_t *out);

/*
 Arity `n` of the symmetric group acting.

 # Safety
 `c` must be a live handle; `out` a valid pointer.
 */
enum OfStatus of_complex_arity(const struct OfComplex *c, size_t *out);

/*
 Dimension of homology in degree `q`.

 # Safety
 `c` must be a live handle; `out` a valid pointer.
 */
enum OfStatus of_complex_homology(const struct OfComplex *c, int32_t q, size_t *out);

/*
 Homology as a JSON object `{"degree": dim}`. Free with `of_string_free`.

 # Safety
 `c` must be a live handle; `out` a valid pointer.
 */
enum OfStatus of_complex_homology_json(const struct OfComplex *c, char **out);

/*
 Run a named check with default parameters. Writes the JSON report to
 `report` (may be null) and returns `OF_STATUS_CHECK_FAILED` when the check
 ran and failed.

 # Safety
 `id` must be a nul-terminated string; `report` null or a valid pointer.
 */
enum OfStatus of_verify(const char *id, enum OfField field, uint64_t seed, char **report);

/*
 Release a string returned by this library. Null is ignored.

 # Safety
 `s` must be null or a string returned by this library, not yet freed.
 */
void of_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPERADFORGE_H */
