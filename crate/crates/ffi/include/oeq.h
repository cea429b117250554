#ifndef OEQ_H
#define OEQ_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OeqStatus {
  OEQ_STATUS_OK = 0,
  OEQ_STATUS_NULL_ARGUMENT = 1,
  OEQ_STATUS_INVALID_UTF8 = 2,
  OEQ_STATUS_PARSE_ERROR = 3,
  OEQ_STATUS_INVALID_INPUT = 4,
  OEQ_STATUS_OBSTRUCTED = 5,
  OEQ_STATUS_BUDGET_EXHAUSTED = 6,
  OEQ_STATUS_INTERNAL = 7,
} OeqStatus;

// Matrix factorisation read from the JSON archive format.
typedef struct OeqDefect OeqDefect;

// Sparse polynomial with rational coefficients.
typedef struct OeqPolynomial OeqPolynomial;

// Quasi-homogeneous potential with an isolated singularity.
typedef struct OeqPotential OeqPotential;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or an empty string.
// The pointer stays valid until the next call into this library on the
// same thread.
const char *oeq_last_error(void);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void oeq_string_free(char *s);

// Parses a polynomial such as `-3/8*x1^2*a1 + y1^3`.
//
// # Safety
// `src` must be a valid C string and `out` a valid pointer.
enum OeqStatus oeq_polynomial_parse(const char *src, struct OeqPolynomial **out);

// # Safety
// `p` must be null or a handle from this library, not yet freed.
void oeq_polynomial_free(struct OeqPolynomial *p);

// # Safety
// `p` must be a live handle and `out` a valid pointer.
enum OeqStatus oeq_polynomial_to_string(const struct OeqPolynomial *p, char **out);

// # Safety
// `a`, `b` must be live handles and `out` a valid pointer.
enum OeqStatus oeq_polynomial_add(const struct OeqPolynomial *a,
                                  const struct OeqPolynomial *b,
                                  struct OeqPolynomial **out);

// # Safety
// `a`, `b` must be live handles and `out` a valid pointer.
enum OeqStatus oeq_polynomial_mul(const struct OeqPolynomial *a,
                                  const struct OeqPolynomial *b,
                                  struct OeqPolynomial **out);

// Writes 1 to `out` when the polynomials are equal, 0 otherwise.
//
// # Safety
// `a`, `b` must be live handles and `out` a valid pointer.
enum OeqStatus oeq_polynomial_equal(const struct OeqPolynomial *a,
                                    const struct OeqPolynomial *b,
                                    int32_t *out);

// Checks quasi-homogeneity and isolatedness of `p`.
//
// # Safety
// `p` must be a live handle and `out` a valid pointer.
enum OeqStatus oeq_potential_new(const struct OeqPolynomial *p, struct OeqPotential **out);

// Catalogue name (`E13`, `A2xA2`, …) or a polynomial, with variables renamed
// to `prefix1, prefix2, …`.
//
// # Safety
// `spec` and `prefix` must be valid C strings and `out` a valid pointer.
enum OeqStatus oeq_potential_resolve(const char *spec,
                                     const char *prefix,
                                     struct OeqPotential **out);

// # Safety
// `p` must be null or a handle from this library, not yet freed.
void oeq_potential_free(struct OeqPotential *p);

// Central charge as an exact rational string such as `16/15`.
//
// # Safety
// `p` must be a live handle and `out` a valid pointer.
enum OeqStatus oeq_potential_central_charge(const struct OeqPotential *p, char **out);

// # Safety
// `p` must be a live handle and `out` a valid pointer.
enum OeqStatus oeq_potential_milnor(const struct OeqPotential *p, size_t *out);

// Reads a defect from its JSON archive text.
//
// # Safety
// `json` must be a valid C string and `out` a valid pointer.
enum OeqStatus oeq_defect_from_json(const char *json, struct OeqDefect **out);

// # Safety
// `d` must be null or a handle from this library, not yet freed.
void oeq_defect_free(struct OeqDefect *d);

// Full verification. `ok` receives 1 when every check passes and the
// stored quantum dimensions match; `report_json` may be null. A
// non-positive budget means no time limit.
//
// # Safety
// `d` must be a live handle, `ok` a valid pointer and `report_json` null or
// a valid pointer.
enum OeqStatus oeq_defect_verify(const struct OeqDefect *d,
                                 double budget_secs,
                                 int32_t *ok,
                                 char **report_json);

// Quantum dimensions reduced modulo the constraint ideal.
//
// # Safety
// `d` must be a live handle and `ql`, `qr` valid pointers.
enum OeqStatus oeq_defect_qdim(const struct OeqDefect *d, double budget_secs, char **ql, char **qr);

// Searches for a graded rank-`rank` defect between `v1` (x-variables) and
// `v2` (y-variables). `verdict` receives 0 for Solvable, 1 for a negative
// answer and 2 when the budget ran out. Obstructed pairs return
// `OEQ_STATUS_OBSTRUCTED` and still fill the report.
//
// # Safety
// `v1`, `v2` must be live handles, `verdict` a valid pointer and
// `report_json` null or a valid pointer.
enum OeqStatus oeq_search(const struct OeqPotential *v1,
                          const struct OeqPotential *v2,
                          size_t rank,
                          double budget_secs,
                          int32_t *verdict,
                          char **report_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OEQ_H */
