#ifndef ANALYTICAL_ENGINE_H
#define ANALYTICAL_ENGINE_H

/* Generated by cbindgen from the analytical-engine-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Which single-step rewrite to apply.
 */
typedef enum AeMutation {
  /**
   * Exchange a subtraction for an addition or back
   */
  AE_MUTATION_FLIP_SUB_ADD = 0,
  /**
   * Swap the two operands
   */
  AE_MUTATION_SWAP_OPERANDS = 1,
} AeMutation;

/**
 * Outcome of every call. Zero is success; everything else says why the
 * out-parameters were left untouched.
 */
typedef enum AeStatus {
  AE_STATUS_OK = 0,
  AE_STATUS_NULL_ARGUMENT = 1,
  AE_STATUS_INVALID_UTF8 = 2,
  AE_STATUS_PARSE_ERROR = 3,
  AE_STATUS_MUTATION_ERROR = 4,
  AE_STATUS_INVALID_ARGUMENT = 5,
  AE_STATUS_UNBOUND_INPUT = 6,
  AE_STATUS_VAR_OUT_OF_RANGE = 7,
  AE_STATUS_DIVISION_BY_ZERO = 8,
  AE_STATUS_NON_INTEGER_COUNTER = 9,
  AE_STATUS_LOOP_LIMIT_EXCEEDED = 10,
  AE_STATUS_INVALID_DECK = 11,
  AE_STATUS_INTERNAL_PANIC = 12,
} AeStatus;

/**
 * An immutable deck (opaque).
 */
typedef struct AeDeck AeDeck;

/**
 * A finished run: final store plus full trace (opaque).
 */
typedef struct AeRun AeRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses canonical deck text into a handle.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string; `out` must be writable.
 */
enum AeStatus ae_deck_parse(const char *text, struct AeDeck **out);

/**
 * The bundled simultaneous-equations deck.
 *
 * # Safety
 * `out` must be writable.
 */
enum AeStatus ae_deck_note_d(struct AeDeck **out);

/**
 * One Bernoulli cycle for the given n >= 1.
 *
 * # Safety
 * `out` must be writable.
 */
enum AeStatus ae_deck_note_g_cycle(uint32_t n, struct AeDeck **out);

/**
 * The full Bernoulli tabulation up to B_{2*n_max-1}, n_max >= 1.
 *
 * # Safety
 * `out` must be writable.
 */
enum AeStatus ae_deck_note_g_full(uint32_t n_max, struct AeDeck **out);

/**
 * The prime-polynomial tabulation of the first `count` values, count >= 1.
 *
 * # Safety
 * `out` must be writable.
 */
enum AeStatus ae_deck_primes(uint32_t count, struct AeDeck **out);

/**
 * Canonical text of a deck; free the result with [`ae_string_free`].
 *
 * # Safety
 * `deck` must be a live handle; `out` must be writable.
 */
enum AeStatus ae_deck_serialize(const struct AeDeck *deck, char **out);

/**
 * Number of operation cards in the deck.
 *
 * # Safety
 * `deck` must be a live handle; `out` must be writable.
 */
enum AeStatus ae_deck_step_count(const struct AeDeck *deck, uint32_t *out);

/**
 * A copy of the deck with one step rewritten.
 *
 * # Safety
 * `deck` must be a live handle; `out` must be writable.
 */
enum AeStatus ae_deck_mutate(const struct AeDeck *deck,
                             uint32_t step,
                             enum AeMutation kind,
                             struct AeDeck **out);

/**
 * Releases a deck handle. Null is tolerated.
 *
 * # Safety
 * `deck` must have come from this library and not been freed before.
 */
void ae_deck_free(struct AeDeck *deck);

/**
 * Runs a deck. Bindings come as parallel arrays: `vars[i]` receives the
 * rational in `values[i]` (text form, e.g. "-691/2730"). `max_steps` of
 * zero means the default budget of one million operations.
 *
 * # Safety
 * `deck` must be a live handle; `vars`/`values` must hold `bindings_len`
 * readable entries (null allowed when the length is zero); `out` must be
 * writable.
 */
enum AeStatus ae_execute(const struct AeDeck *deck,
                         const uint32_t *vars,
                         const char *const *values,
                         size_t bindings_len,
                         uint64_t max_steps,
                         struct AeRun **out);

/**
 * Number of operations the run executed.
 *
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum AeStatus ae_run_steps_executed(const struct AeRun *run, uint64_t *out);

/**
 * Final value of one variable, in the canonical "[-]p/q" text form; free
 * it with [`ae_string_free`].
 *
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum AeStatus ae_run_value(const struct AeRun *run, uint32_t var, char **out);

/**
 * How many values the variable has received (preset and bound values
 * count once).
 *
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum AeStatus ae_run_revision(const struct AeRun *run, uint32_t var, uint64_t *out);

/**
 * The run's trace as JSON Lines; free with [`ae_string_free`].
 *
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum AeStatus ae_run_trace_jsonl(const struct AeRun *run, char **out);

/**
 * The run rendered as the six-column diagram table. The deck must be the
 * one the run came from (it supplies the repeat-block structure). Free
 * the string with [`ae_string_free`].
 *
 * # Safety
 * `run` and `deck` must be live handles; `out` must be writable.
 */
enum AeStatus ae_run_render_table(const struct AeRun *run, const struct AeDeck *deck, char **out);

/**
 * Releases a run handle. Null is tolerated.
 *
 * # Safety
 * `run` must have come from this library and not been freed before.
 */
void ae_run_free(struct AeRun *run);

/**
 * Releases a string produced by this library. Null is tolerated.
 *
 * # Safety
 * `text` must have come from this library and not been freed before.
 */
void ae_string_free(char *text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANALYTICAL_ENGINE_H */
