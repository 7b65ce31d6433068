#ifndef WPC_H
#define WPC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. WPC_STATUS_OK is zero so statuses can be
 * tested like C error codes.
 */
typedef enum WpcStatus {
  WPC_STATUS_OK = 0,
  WPC_STATUS_NULL_ARGUMENT = 1,
  WPC_STATUS_INVALID_INPUT = 2,
  WPC_STATUS_NUMERIC_FAILURE = 3,
  WPC_STATUS_IO_FAILURE = 4,
  WPC_STATUS_INTERNAL_PANIC = 5,
} WpcStatus;

/**
 * Dilatation field samples on a logarithmic half-plane grid.
 */
typedef struct WpcField WpcField;

/**
 * Sampled boundary data on a line window or the unit circle.
 */
typedef struct WpcSampled WpcSampled;

/**
 * Welding factorization: two log-derivatives plus convergence data.
 */
typedef struct WpcWelding WpcWelding;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *wpc_version(void);

/**
 * Message of the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *wpc_last_error(void);

/**
 * Builds sampled data on the symmetric window [-half_width, half_width]
 * from node_count re/im pairs; node_count - 1 must be even and at least 16.
 */
enum WpcStatus wpc_sampled_line(double half_width,
                                uintptr_t node_count,
                                const double *re,
                                const double *im,
                                bool modulo_constant,
                                struct WpcSampled **out);

/**
 * Builds sampled data on the uniform circle grid of node_count angles;
 * node_count must be a power of two, at least 16.
 */
enum WpcStatus wpc_sampled_circle(uintptr_t node_count,
                                  const double *re,
                                  const double *im,
                                  bool modulo_constant,
                                  struct WpcSampled **out);

/**
 * Reads a sampled-function schema file.
 */
enum WpcStatus wpc_sampled_read(const char *path, struct WpcSampled **out);

/**
 * Writes a sampled-function schema file.
 */
enum WpcStatus wpc_sampled_write(const struct WpcSampled *handle, const char *path);

/**
 * Number of stored samples.
 */
enum WpcStatus wpc_sampled_len(const struct WpcSampled *handle, uintptr_t *out);

/**
 * Copies the samples into caller-owned re/im buffers of length len, which
 * must equal wpc_sampled_len.
 */
enum WpcStatus wpc_sampled_copy_values(const struct WpcSampled *handle,
                                       double *re,
                                       double *im,
                                       uintptr_t len);

/**
 * Releases a sampled-function handle. Null is ignored.
 */
void wpc_sampled_free(struct WpcSampled *handle);

/**
 * Order-(1/p, p) seminorm of line samples.
 */
enum WpcStatus wpc_besov_seminorm(const struct WpcSampled *handle, double p, double *out);

/**
 * Mean-oscillation sup over dyadic intervals.
 */
enum WpcStatus wpc_bmo_norm(const struct WpcSampled *handle, double *out);

/**
 * Conjugate function: Hilbert transform for line samples, conjugate series
 * for circle samples. The result is a new handle.
 */
enum WpcStatus wpc_hilbert(const struct WpcSampled *handle, struct WpcSampled **out);

/**
 * Solves the arc-length welding fixed point for real v. Non-convergence is
 * not an error here; the handle records it.
 */
enum WpcStatus wpc_eval_lambda(const struct WpcSampled *v,
                               double tol,
                               uintptr_t max_iter,
                               double damping,
                               struct WpcWelding **out);

/**
 * Inverse direction of the welding fixed point.
 */
enum WpcStatus wpc_eval_lambda_inverse(const struct WpcSampled *u, struct WpcSampled **out);

/**
 * Final fixed-point defect of the iteration.
 */
enum WpcStatus wpc_welding_residual(const struct WpcWelding *handle, double *out);

/**
 * Iterations actually used.
 */
enum WpcStatus wpc_welding_iterations(const struct WpcWelding *handle, uintptr_t *out);

/**
 * Whether the residual reached the tolerance.
 */
enum WpcStatus wpc_welding_converged(const struct WpcWelding *handle, bool *out);

/**
 * Copy of the quasisymmetric-side log-derivative.
 */
enum WpcStatus wpc_welding_log_f_prime(const struct WpcWelding *handle, struct WpcSampled **out);

/**
 * Copy of the conformal-side log-derivative.
 */
enum WpcStatus wpc_welding_log_h_prime(const struct WpcWelding *handle, struct WpcSampled **out);

/**
 * Releases a welding handle. Null is ignored.
 */
void wpc_welding_free(struct WpcWelding *handle);

/**
 * Reads a dilatation-field schema file.
 */
enum WpcStatus wpc_field_read(const char *path, struct WpcField **out);

/**
 * Largest sampled dilatation modulus.
 */
enum WpcStatus wpc_field_sup(const struct WpcField *handle, double *out);

/**
 * Degree-p integral norm of the field against the hyperbolic density.
 */
enum WpcStatus wpc_mp_norm(const struct WpcField *handle, double p, double *out);

/**
 * Square-mass box sup of the field.
 */
enum WpcStatus wpc_carleson_norm(const struct WpcField *handle, double *out);

/**
 * Comparison constant between the box sup and the integral norm, p >= 2.
 */
enum WpcStatus wpc_cp_constant(double p, double *out);

/**
 * Releases a field handle. Null is ignored.
 */
void wpc_field_free(struct WpcField *handle);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* WPC_H */
