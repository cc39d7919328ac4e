#ifndef BOSEGAS_H
#define BOSEGAS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of a call. Values match the command-line exit codes where both exist.
typedef enum BgStatus {
  BG_STATUS_OK = 0,
  BG_STATUS_IO = 1,
  BG_STATUS_CONFIG = 2,
  BG_STATUS_NUMERICAL = 3,
  BG_STATUS_MONITOR = 4,
  // A required pointer was null or a string was not UTF-8.
  BG_STATUS_INVALID_ARGUMENT = 5,
  // An output buffer was too small.
  BG_STATUS_BUFFER_TOO_SMALL = 6,
  // A panic was caught inside the library.
  BG_STATUS_INTERNAL = 7,
} BgStatus;

// Opaque simulation handle.
typedef struct BgSimulation BgSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the last error message of this thread, NUL-terminated, into `buf`.
// Returns the message length in bytes without the terminator; if this is
// not less than `len` the message is truncated. `buf` may be null when
// `len` is 0, to query the length.
//
// # Safety
// `buf` must point to `len` writable bytes.
size_t bg_last_error_message(char *buf, size_t len);

// Build a simulation from a TOML configuration with `grid`, `potential`,
// `initial` and `time` tables. On success `*out` owns a handle that must be
// released with [`bg_simulation_free`].
//
// # Safety
// `config_toml` must be a NUL-terminated string and `out` a valid pointer.
enum BgStatus bg_simulation_new(const char *config_toml, struct BgSimulation **out);

// Release a handle. Null is ignored.
//
// # Safety
// `sim` must be null or a handle from [`bg_simulation_new`] not yet freed.
void bg_simulation_free(struct BgSimulation *sim);

// Advance by `steps` time steps. Fails with `Monitor` if the state stops
// being finite; the handle then holds the last state reached.
//
// # Safety
// `sim` must be a live handle.
enum BgStatus bg_simulation_step(struct BgSimulation *sim, uint64_t steps);

// Spatial dimension of the simulation, or 0 for a null handle.
//
// # Safety
// `sim` must be null or a live handle.
size_t bg_simulation_dim(const struct BgSimulation *sim);

// Current time, or NaN for a null handle.
//
// # Safety
// `sim` must be null or a live handle.
double bg_simulation_time(const struct BgSimulation *sim);

// Copy the particle position into `out[0..dim]`.
//
// # Safety
// `sim` must be a live handle and `out` point to `len` writable values.
enum BgStatus bg_simulation_position(const struct BgSimulation *sim, double *out, size_t len);

// Copy the particle momentum into `out[0..dim]`.
//
// # Safety
// `sim` must be a live handle and `out` point to `len` writable values.
enum BgStatus bg_simulation_momentum(const struct BgSimulation *sim, double *out, size_t len);

// Total energy of the current state.
//
// # Safety
// `sim` must be a live handle and `out` a valid pointer.
enum BgStatus bg_simulation_hamiltonian(const struct BgSimulation *sim, double *out);

// Friction at speed `speed` in the limit of vanishing regularization, for
// the Gaussian family with exponent `n`, width `width` and density `rho0`
// in dimension `dim`. Zero below the sound speed; `Config` at it.
//
// # Safety
// `out` must be a valid pointer.
enum BgStatus bg_friction_limit(double n,
                                double width,
                                double rho0,
                                size_t dim,
                                double speed,
                                double *out);

// Regularized coupling force at speed `speed` and regularization `eps`,
// with the default quadrature in dimension `dim`.
//
// # Safety
// `out` must be a valid pointer.
enum BgStatus bg_coupling_force(double n,
                                double width,
                                double rho0,
                                size_t dim,
                                double speed,
                                double eps,
                                double *out);

// Fourier transform of the surface measure of the unit sphere in
// dimension `dim`, evaluated at radius `r`.
//
// # Safety
// `out` must be a valid pointer.
enum BgStatus bg_sphere_kernel(size_t dim, double r, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOSEGAS_H */
