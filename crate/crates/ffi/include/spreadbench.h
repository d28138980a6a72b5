#ifndef SPREADBENCH_H
#define SPREADBENCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum SbStatus {
  SB_STATUS_OK = 0,
  SB_STATUS_NULL_POINTER = 1,
  SB_STATUS_INVALID_SPEC = 2,
  SB_STATUS_INVALID_INPUT = 3,
  SB_STATUS_PARSE = 4,
  SB_STATUS_UTF8 = 5,
  SB_STATUS_PROTOCOL = 6,
  SB_STATUS_IO = 7,
  SB_STATUS_PANIC = 8,
} SbStatus;

/**
 * A blocking of the naturals.
 */
typedef struct SbBlocking SbBlocking;

/**
 * A validated normed space.
 */
typedef struct SbSpace SbSpace;

/**
 * A finitely supported vector.
 */
typedef struct SbVector SbVector;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *sb_last_error(void);

/**
 * Library version as a static string.
 */
const char *sb_version(void);

/**
 * Parses a space specification document.
 */
enum SbStatus sb_space_from_json(const char *json, struct SbSpace **out);

/**
 * The segmented `ℓ_p`-sum with `n_s` the least natural above `s^{p·p_s/(p−p_s)}`.
 */
enum SbStatus sb_make_example_space(double p, const double *ps, size_t len, struct SbSpace **out);

void sb_space_free(struct SbSpace *space);

/**
 * A vector from parallel arrays of 1-based indices and values.
 */
enum SbStatus sb_vector_new(const size_t *indices,
                            const double *values,
                            size_t len,
                            struct SbVector **out);

/**
 * Parses `"1:1,3:-1"`.
 */
enum SbStatus sb_vector_parse(const char *text, struct SbVector **out);

void sb_vector_free(struct SbVector *v);

enum SbStatus sb_norm(const struct SbSpace *space, const struct SbVector *v, double *out);

/**
 * Parses `"1,2|4,7"`.
 */
enum SbStatus sb_blocking_parse(const char *text, struct SbBlocking **out);

void sb_blocking_free(struct SbBlocking *b);

enum SbStatus sb_blocking_len(const struct SbBlocking *b, size_t *out);

/**
 * Whether every block of `f` is a union of blocks of `e`.
 */
enum SbStatus sb_is_coarser(const struct SbBlocking *f, const struct SbBlocking *e, bool *out);

/**
 * Number of length-`k` blockings coarser than `p`.
 */
enum SbStatus sb_coarsenings_count(const struct SbBlocking *p, size_t k, size_t *out);

/**
 * Whether segment `s` witnesses failure of type `p` with constant `c`.
 */
enum SbStatus sb_type_p_witness(const struct SbSpace *space, size_t s, double c, bool *out);

/**
 * Least-squares Krivine p; `INFINITY` for flat growth.
 */
enum SbStatus sb_krivine_p(const struct SbSpace *space, size_t max_n, size_t offset, double *out);

/**
 * Runs a command from a run-config document. On success `*out_report`
 * receives the report (free with [`sb_string_free`]) and `*out_passed` is
 * 1 if every check passed, 0 otherwise.
 */
enum SbStatus sb_run_command_json(const char *config_json, char **out_report, int32_t *out_passed);

void sb_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SPREADBENCH_H */
