#ifndef QREPGAME_H
#define QREPGAME_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Entries written by [`qrg_rep_bimatrix`]: 32×32 cells, two payoffs each.
 */
#define QRG_BIMATRIX_LEN 2048

typedef enum {
  QRG_STATUS_OK = 0,
  QRG_STATUS_NULL_POINTER = 1,
  QRG_STATUS_INVALID_ARGUMENT = 2,
  QRG_STATUS_INVALID_STATE = 3,
  QRG_STATUS_UNSUPPORTED = 4,
  QRG_STATUS_BUFFER_TOO_SMALL = 5,
  QRG_STATUS_CONFIG = 6,
  QRG_STATUS_PANIC = 7,
} QrgStatus;

/**
 * Opaque game handle.
 */
typedef struct QrgGame QrgGame;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a game on a ten-qubit state with PD payoffs `T, R, P, S`.
 *
 * `re` and `im` hold `len = 1024` amplitudes, qubit 1 most significant;
 * `im` may be null for real states. The squared norm must be 1 within 1e-9.
 *
 * # Safety
 * `re` (and `im` if not null) must point to `len` readable doubles and `out`
 * to writable storage for one pointer.
 */
QrgStatus qrg_game_new_pd(const double *re,
                          const double *im,
                          size_t len,
                          double t,
                          double r,
                          double p,
                          double s,
                          QrgGame **out);

/**
 * Like [`qrg_game_new_pd`] with a general stage game: `outcomes` holds
 * `u1, u2` for the outcomes 00, 01, 10, 11 in that order (8 doubles).
 *
 * # Safety
 * As for [`qrg_game_new_pd`]; `outcomes` must point to 8 readable doubles.
 */
QrgStatus qrg_game_new(const double *re,
                       const double *im,
                       size_t len,
                       const double *outcomes,
                       QrgGame **out);

/**
 * Creates a game from a JSON configuration with protocol `mw10` or
 * `classical`.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` writable.
 */
QrgStatus qrg_game_from_json(const char *json, QrgGame **out);

/**
 * Releases a game. Null is ignored.
 *
 * # Safety
 * `game` must come from one of the constructors and not be used afterwards.
 */
void qrg_game_free(QrgGame *game);

/**
 * Writes `E1.1, E1.2, E2.1, E2.2` of a pure profile, all moves applied at once.
 *
 * # Safety
 * `game` must be live and `out` must point to 4 writable doubles.
 */
QrgStatus qrg_play_batch(const QrgGame *game, uint32_t s1, uint32_t s2, double *out);

/**
 * Same as [`qrg_play_batch`] with a measurement between the stages.
 *
 * # Safety
 * As for [`qrg_play_batch`].
 */
QrgStatus qrg_play_sequential(const QrgGame *game, uint32_t s1, uint32_t s2, double *out);

/**
 * Writes the 32×32 table of total payoffs row-major, `u1, u2` per cell.
 *
 * # Safety
 * `game` must be live and `out` must point to `len` writable doubles.
 */
QrgStatus qrg_rep_bimatrix(const QrgGame *game, double *out, size_t len);

/**
 * Subgame-perfect equilibria of a pair-product game.
 *
 * Writes at most `capacity` profiles into `s1`, `s2` and `payoffs` (two
 * doubles per profile) and the total count into `count`. When the count
 * exceeds `capacity` the status is `BufferTooSmall` and `count` is still
 * set. Passing `capacity = 0` with null arrays queries the count.
 *
 * # Safety
 * The arrays must hold `capacity` (resp. `2·capacity`) writable elements and
 * `count` must be writable.
 */
QrgStatus qrg_spe(const QrgGame *game,
                  double tol,
                  uint32_t *s1,
                  uint32_t *s2,
                  double *payoffs,
                  size_t capacity,
                  size_t *count);

/**
 * `min{T-R, P-S} / (T-R+P-S)` for a prisoners' dilemma.
 *
 * # Safety
 * `out` must be writable.
 */
QrgStatus qrg_cooperation_bound(double t, double r, double p, double s, double *out);

/**
 * Qubits needed for `stages` rounds.
 *
 * # Safety
 * `out` must be writable.
 */
QrgStatus qrg_qubit_count(uint32_t stages, uint64_t *out);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library from the same thread.
 */
const char *qrg_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QREPGAME_H */
