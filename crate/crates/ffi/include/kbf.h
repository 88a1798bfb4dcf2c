/* C interface to the kbf KdV-Burgers-Fisher solver. */

#ifndef KBF_H
#define KBF_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KbfScheme {
  KBF_SCHEME_STRANG = 0,
  KBF_SCHEME_LIE_TROTTER = 1,
} KbfScheme;

/**
 * Result code of every fallible call.
 */
typedef enum KbfStatus {
  KBF_STATUS_OK = 0,
  KBF_STATUS_NULL_POINTER = 1,
  KBF_STATUS_INVALID_ARGUMENT = 2,
  KBF_STATUS_INVALID_GRID = 3,
  KBF_STATUS_DIMENSION_MISMATCH = 4,
  KBF_STATUS_GRID_MISMATCH = 5,
  KBF_STATUS_NOT_REAL_REPRESENTABLE = 6,
  KBF_STATUS_VALIDATION = 7,
  KBF_STATUS_BLOW_UP = 8,
  KBF_STATUS_NON_FINITE = 9,
  KBF_STATUS_BUFFER_TOO_SMALL = 10,
  KBF_STATUS_PANIC = 11,
} KbfStatus;

/**
 * Sign convention of the fifth-order term; `Spectral` is the default.
 */
typedef enum KbfSymbol {
  KBF_SYMBOL_SPECTRAL = 0,
  KBF_SYMBOL_OPERATOR = 1,
} KbfSymbol;

/**
 * Opaque periodic grid.
 */
typedef struct KbfGrid KbfGrid;

/**
 * Opaque Fourier-coefficient state.
 */
typedef struct KbfState KbfState;

typedef struct KbfParams {
  double nu;
  double mu;
  double gamma;
  double eps_conv;
  double eps_react;
  enum KbfSymbol symbol;
} KbfParams;

typedef struct KbfSolveOptions {
  double dt;
  double t_final;
  enum KbfScheme scheme;
  /**
   * RK4 steps per nonlinear flow; 0 is rejected.
   */
  uint32_t substeps;
  /**
   * Non-zero applies the 2/3 dealiasing rule to the nonlinear products.
   */
  uint8_t dealias;
  /**
   * Non-zero merges adjacent linear half steps.
   */
  uint8_t fuse_half_steps;
} KbfSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next kbf call on the same thread.
 */
const char *kbf_last_error_message(void);

/**
 * Static description of a status code.
 */
const char *kbf_status_string(enum KbfStatus status);

struct KbfParams kbf_default_params(void);

struct KbfSolveOptions kbf_default_solve_options(double dt, double t_final);

/**
 * Creates a grid of `n_modes` points on `[domain_start, domain_start + domain_length)`.
 *
 * # Safety
 * `out` must be valid for one pointer write.
 */
enum KbfStatus kbf_grid_new(size_t n_modes,
                            double domain_start,
                            double domain_length,
                            struct KbfGrid **out);

/**
 * # Safety
 * `grid` must come from [`kbf_grid_new`] and not be used afterwards. Null is ignored.
 */
void kbf_grid_free(struct KbfGrid *grid);

/**
 * Number of collocation points, or 0 for a null grid.
 *
 * # Safety
 * `grid` must be null or a live grid handle.
 */
size_t kbf_grid_n_modes(const struct KbfGrid *grid);

/**
 * Copies the collocation points into `out[0..len]`; `len` must be at least N.
 *
 * # Safety
 * `grid` must be live and `out` valid for `len` writes.
 */
enum KbfStatus kbf_grid_points(const struct KbfGrid *grid, double *out, size_t len);

/**
 * Transforms `len` physical samples into a new state on `grid`.
 *
 * # Safety
 * `grid` must be live, `values` valid for `len` reads, `out` for one write.
 */
enum KbfStatus kbf_state_from_values(const struct KbfGrid *grid,
                                     const double *values,
                                     size_t len,
                                     struct KbfState **out);

/**
 * # Safety
 * `state` must come from this library and not be used afterwards. Null is ignored.
 */
void kbf_state_free(struct KbfState *state);

/**
 * Number of collocation points of the state's grid, or 0 for null.
 *
 * # Safety
 * `state` must be null or a live state handle.
 */
size_t kbf_state_len(const struct KbfState *state);

/**
 * Writes the physical values of `state` into `out[0..len]`.
 *
 * # Safety
 * `state` must be live and `out` valid for `len` writes.
 */
enum KbfStatus kbf_state_values(const struct KbfState *state, double *out, size_t len);

/**
 * Sobolev norm of order `s` (0 is the grid-weighted L2 norm).
 *
 * # Safety
 * `state` must be live and `out` valid for one write.
 */
enum KbfStatus kbf_state_norm(const struct KbfState *state, uint32_t s, double *out);

/**
 * `||a - b||` in the order-`s` Sobolev norm; a coarser state is
 * interpolated onto the finer grid first.
 *
 * # Safety
 * `a`, `b` must be live and `out` valid for one write.
 */
enum KbfStatus kbf_error_norm(const struct KbfState *a,
                              const struct KbfState *b,
                              uint32_t s,
                              double *out);

/**
 * Integrates `initial` to `options.t_final` with the splitting scheme and
 * returns the final state.
 *
 * # Safety
 * Pointers must be live/valid; `out` must be valid for one write.
 */
enum KbfStatus kbf_solve(const struct KbfState *initial,
                         const struct KbfParams *params,
                         const struct KbfSolveOptions *options,
                         struct KbfState **out);

/**
 * Integrating-factor RK4 reference with step `dt`.
 *
 * # Safety
 * Pointers must be live/valid; `out` must be valid for one write.
 */
enum KbfStatus kbf_reference(const struct KbfState *initial,
                             const struct KbfParams *params,
                             double dt,
                             double t_final,
                             struct KbfState **out);

/**
 * Pairwise orders `log(e[i]/e[i+1]) / log(factor)` written to
 * `orders[0..len-1]`.
 *
 * # Safety
 * `errors` valid for `len` reads, `orders` for `orders_len` writes.
 */
enum KbfStatus kbf_observed_order(const double *errors,
                                  size_t len,
                                  double factor,
                                  double *orders,
                                  size_t orders_len);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* KBF_H */
