#ifndef STI_H
#define STI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum StiStatus {
  STI_STATUS_OK = 0,
  STI_STATUS_NULL_POINTER = 1,
  STI_STATUS_INVALID_UTF8 = 2,
  STI_STATUS_PARSE_ERROR = 3,
  /**
   * A derivation failed to check, or a bound verdict failed.
   */
  STI_STATUS_CHECK_FAILED = 4,
  /**
   * Fuel or search bounds ran out.
   */
  STI_STATUS_EXHAUSTED = 5,
  STI_STATUS_INVALID_ARGUMENT = 6,
  STI_STATUS_PANIC = 7,
} StiStatus;

/**
 * Opaque typing derivation.
 */
typedef struct StiDerivation StiDerivation;

/**
 * Opaque λ-term.
 */
typedef struct StiTerm StiTerm;

/**
 * Inference search bounds; see [`sti_bounds_default`].
 */
typedef struct StiBounds {
  size_t max_type_elements;
  uint64_t max_degree;
  uint64_t max_proof_size;
  uint64_t time_fuel;
} StiBounds;

typedef struct StiMeasures {
  uint64_t proof_size;
  uint64_t subject_size;
  uint64_t rank;
  uint64_t degree;
} StiMeasures;

typedef struct StiBoundReport {
  uint64_t subject_size;
  uint64_t degree;
  uint64_t rank;
  /**
   * `|M|^(D+1)`, saturated at `UINT64_MAX`.
   */
  uint64_t theorem_bound;
  uint64_t longest_reduction;
  uint64_t max_normal_form_size;
  uint64_t weight_ceiling;
  bool passed;
} StiBoundReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Owned by the
 * library; valid until the next failing call on the same thread.
 */
const char *sti_last_error(void);

void sti_clear_error(void);

/**
 * Library version, static.
 */
const char *sti_version(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, freed once.
 */
void sti_string_free(char *s);

struct StiBounds sti_bounds_default(void);

/**
 * Parses `text`, e.g. `"\\x. x x"`, into `*out`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum StiStatus sti_term_parse(const char *text, struct StiTerm **out);

/**
 * # Safety
 * `t` must be NULL or a handle from this library, freed once.
 */
void sti_term_free(struct StiTerm *t);

/**
 * `|M|`, or 0 for NULL.
 *
 * # Safety
 * `t` must be NULL or a live handle.
 */
size_t sti_term_size(const struct StiTerm *t);

/**
 * The term in concrete syntax; free with [`sti_string_free`]. NULL for NULL.
 *
 * # Safety
 * `t` must be NULL or a live handle.
 */
char *sti_term_to_string(const struct StiTerm *t);

/**
 * Searches for a derivation of `t`. `bounds` may be NULL for the defaults.
 *
 * # Safety
 * `t` must be a live handle, `bounds` NULL or valid, `out` valid.
 */
enum StiStatus sti_infer(const struct StiTerm *t,
                         const struct StiBounds *bounds,
                         struct StiDerivation **out);

/**
 * Reads and checks a derivation from its JSON encoding.
 * `STI_STATUS_CHECK_FAILED` if it decodes but does not check.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` valid.
 */
enum StiStatus sti_derivation_from_json(const char *json, struct StiDerivation **out);

/**
 * # Safety
 * `d` must be NULL or a handle from this library, freed once.
 */
void sti_derivation_free(struct StiDerivation *d);

/**
 * JSON encoding; free with [`sti_string_free`]. NULL for NULL.
 *
 * # Safety
 * `d` must be NULL or a live handle.
 */
char *sti_derivation_to_json(const struct StiDerivation *d);

/**
 * Indented text layout; free with [`sti_string_free`]. NULL for NULL.
 *
 * # Safety
 * `d` must be NULL or a live handle.
 */
char *sti_derivation_pretty(const struct StiDerivation *d);

/**
 * The subject term as a new handle.
 *
 * # Safety
 * `d` must be a live handle and `out` valid.
 */
enum StiStatus sti_derivation_subject(const struct StiDerivation *d, struct StiTerm **out);

/**
 * `STI_STATUS_OK` if every rule instance checks, else
 * `STI_STATUS_CHECK_FAILED` with the violations as the error message.
 *
 * # Safety
 * `d` must be a live handle.
 */
enum StiStatus sti_derivation_check(const struct StiDerivation *d);

/**
 * # Safety
 * `d` must be a live handle and `out` valid.
 */
enum StiStatus sti_derivation_measures(const struct StiDerivation *d, struct StiMeasures *out);

/**
 * `W(Π, r)`; `r` must be positive.
 *
 * # Safety
 * `d` must be a live handle and `out` valid.
 */
enum StiStatus sti_derivation_weight(const struct StiDerivation *d, uint64_t r, uint64_t *out);

/**
 * Checks the reduction bounds of the subject of `d` against its measures.
 * `fuel` of 0 means the default. Returns `STI_STATUS_CHECK_FAILED` when a
 * verdict fails; `*out` is filled in either way.
 *
 * # Safety
 * `d` must be a live handle and `out` valid.
 */
enum StiStatus sti_verify_bounds(const struct StiDerivation *d,
                                 size_t fuel,
                                 struct StiBoundReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STI_H */
