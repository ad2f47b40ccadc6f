#ifndef RESIDUUM_H
#define RESIDUUM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum ResiduumStatus {
  RESIDUUM_STATUS_OK = 0,
  /**
   * The operation is undefined on these arguments; the output is null.
   */
  RESIDUUM_STATUS_UNDEFINED = 1,
  RESIDUUM_STATUS_NULL_ARGUMENT = 2,
  RESIDUUM_STATUS_INVALID_UTF8 = 3,
  RESIDUUM_STATUS_UNKNOWN_SYSTEM = 4,
  RESIDUUM_STATUS_BAD_EFFECT = 5,
  RESIDUUM_STATUS_SYSTEM_MISMATCH = 6,
  RESIDUUM_STATUS_INTERNAL = 7,
} ResiduumStatus;

/**
 * An effect of one particular system. Opaque.
 */
typedef struct ResiduumEffect ResiduumEffect;

/**
 * An effect system. Opaque.
 */
typedef struct ResiduumSystem ResiduumSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Borrowed; valid
 * until the next call into the library on this thread.
 */
const char *residuum_last_error(void);

/**
 * Looks up a system by key (`atomicity`, `trace:a,b`, `custom:path`, ...).
 *
 * # Safety
 * `key` must be a nul-terminated string; `out` must be writable.
 */
enum ResiduumStatus residuum_system_new(const char *key, struct ResiduumSystem **out);

/**
 * # Safety
 * `sys` must be null or a handle from [`residuum_system_new`] not yet freed.
 */
void residuum_system_free(struct ResiduumSystem *sys);

/**
 * Whether sequencing in `sys` is commutative; false for a null handle.
 *
 * # Safety
 * `sys` must be null or a live system handle.
 */
bool residuum_system_is_commutative(const struct ResiduumSystem *sys);

/**
 * Parses an effect literal in the system's syntax.
 *
 * # Safety
 * `sys` must be a live system handle, `literal` nul-terminated, `out`
 * writable.
 */
enum ResiduumStatus residuum_effect_parse(const struct ResiduumSystem *sys,
                                          const char *literal,
                                          struct ResiduumEffect **out);

/**
 * The effect of `perform label`.
 *
 * # Safety
 * As for [`residuum_effect_parse`].
 */
enum ResiduumStatus residuum_effect_atom(const struct ResiduumSystem *sys,
                                         const char *label,
                                         struct ResiduumEffect **out);

/**
 * # Safety
 * `sys` must be a live system handle; `out` writable.
 */
enum ResiduumStatus residuum_effect_unit(const struct ResiduumSystem *sys,
                                         struct ResiduumEffect **out);

/**
 * # Safety
 * `e` must be null or an effect handle not yet freed.
 */
void residuum_effect_free(struct ResiduumEffect *e);

/**
 * `a ▷ b`. Returns `Undefined` (and a null `out`) when undefined.
 *
 * # Safety
 * All handles must be live; `out` writable.
 */
enum ResiduumStatus residuum_seq(const struct ResiduumSystem *sys,
                                 const struct ResiduumEffect *a,
                                 const struct ResiduumEffect *b,
                                 struct ResiduumEffect **out);

/**
 * `a ⊔ b`.
 *
 * # Safety
 * As for [`residuum_seq`].
 */
enum ResiduumStatus residuum_join(const struct ResiduumSystem *sys,
                                  const struct ResiduumEffect *a,
                                  const struct ResiduumEffect *b,
                                  struct ResiduumEffect **out);

/**
 * The largest effect that may follow `sofar` while staying within `target`.
 *
 * # Safety
 * As for [`residuum_seq`].
 */
enum ResiduumStatus residuum_residual(const struct ResiduumSystem *sys,
                                      const struct ResiduumEffect *sofar,
                                      const struct ResiduumEffect *target,
                                      struct ResiduumEffect **out);

/**
 * Iteration `a*`.
 *
 * # Safety
 * As for [`residuum_seq`].
 */
enum ResiduumStatus residuum_iter(const struct ResiduumSystem *sys,
                                  const struct ResiduumEffect *a,
                                  struct ResiduumEffect **out);

/**
 * Writes whether `a ⊑ b` to `out`.
 *
 * # Safety
 * Handles must be live; `out` writable.
 */
enum ResiduumStatus residuum_le(const struct ResiduumSystem *sys,
                                const struct ResiduumEffect *a,
                                const struct ResiduumEffect *b,
                                bool *out);

/**
 * Renders an effect; null on bad handles. Free with
 * [`residuum_string_free`].
 *
 * # Safety
 * Handles must be null or live.
 */
char *residuum_effect_render(const struct ResiduumSystem *sys, const struct ResiduumEffect *e);

/**
 * Checks a program. On `Ok`, `out_json` receives a JSON array of
 * diagnostics (the `check --format json` schema, with `file` set to
 * `file_name`) and `out_count` its length.
 *
 * # Safety
 * `sys` live; `source` and `file_name` nul-terminated; outputs writable.
 */
enum ResiduumStatus residuum_check_source(const struct ResiduumSystem *sys,
                                          const char *source,
                                          const char *file_name,
                                          char **out_json,
                                          size_t *out_count);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void residuum_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RESIDUUM_H */
