#ifndef QAE_H
#define QAE_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum QaeStatus {
  /**
   * Success.
   */
  QAE_OK = 0,
  /**
   * A required pointer argument was null.
   */
  QAE_NULL_POINTER = 1,
  /**
   * An argument failed validation.
   */
  QAE_INVALID_ARGUMENT = 2,
  /**
   * The computation failed; see qae_last_error.
   */
  QAE_COMPUTE_ERROR = 3,
  /**
   * A panic was caught at the boundary.
   */
  QAE_PANIC = 4,
} QaeStatus;

/**
 * Opaque density-matrix handle.
 */
typedef struct QaeDensity QaeDensity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message for the calling thread into `buffer`
 * (NUL-terminated, truncated to `capacity`). Returns the full message
 * length in bytes, excluding the terminator.
 */
uintptr_t qae_last_error(char *buffer, uintptr_t capacity);

/**
 * Builds a thermal state of the transverse-field Ising chain.
 */
enum QaeStatus qae_density_thermal(uintptr_t n_qubits, double beta, struct QaeDensity **out);

/**
 * Builds a Werner state on two `subsystem_dim`-dimensional subsystems.
 */
enum QaeStatus qae_density_werner(uintptr_t subsystem_dim, double alpha, struct QaeDensity **out);

/**
 * Builds the blend of a seeded Haar-random pure state with I/d.
 */
enum QaeStatus qae_density_blended(uintptr_t dim,
                                   double p0,
                                   uint64_t psi_seed,
                                   struct QaeDensity **out);

/**
 * Builds a density matrix from a row-major interleaved [re, im] buffer of
 * `dim * dim * 2` doubles.
 */
enum QaeStatus qae_density_from_buffer(uintptr_t dim, const double *data, struct QaeDensity **out);

/**
 * Frees a density handle. Null is a no-op.
 */
void qae_density_free(struct QaeDensity *handle);

/**
 * Writes the Hilbert-space dimension of `handle` to `out`.
 */
enum QaeStatus qae_density_dim(const struct QaeDensity *handle, uintptr_t *out);

/**
 * Von Neumann entropy in nats.
 */
enum QaeStatus qae_entropy(const struct QaeDensity *handle, double *out);

/**
 * Fidelity between two states. `squared` selects the squared (Jozsa)
 * convention; otherwise the square-root convention is used.
 */
enum QaeStatus qae_fidelity(const struct QaeDensity *a,
                            const struct QaeDensity *b,
                            bool squared,
                            double *out);

/**
 * Quantum mutual information for a bipartition with leading-factor
 * dimension `dim_a`.
 */
enum QaeStatus qae_mutual_information(const struct QaeDensity *handle,
                                      uintptr_t dim_a,
                                      double *out);

/**
 * Pure-reference compression bound: the sum of the 2^n_latent largest
 * eigenvalues of the state.
 */
enum QaeStatus qae_bound(const struct QaeDensity *handle, uintptr_t n_latent, double *out);

/**
 * Runs one full train/decode experiment from a JSON configuration (the
 * same schema the CLI and manifests use) with the given seed, and writes
 * the decoding fidelity to `out_j_d`.
 */
enum QaeStatus qae_run_json(const char *config_json, uint64_t seed, double *out_j_d);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* QAE_H */
