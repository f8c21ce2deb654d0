#ifndef NETFORGE_H
#define NETFORGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/*
 Result codes. `NF_STATUS_OK` is zero.
 */
typedef enum NfStatus {
  NF_STATUS_OK = 0,
  NF_STATUS_NULL_POINTER = 1,
  NF_STATUS_INVALID_ARGUMENT = 2,
  NF_STATUS_INVALID_NETWORK = 3,
  NF_STATUS_PARSE = 4,
  NF_STATUS_UNSOLVABLE = 5,
  NF_STATUS_ILL_CONDITIONED = 6,
  NF_STATUS_DISCONNECTED_SUPPORT = 7,
  /*
   A Rust panic was caught at the boundary.
   */
  NF_STATUS_INTERNAL = 8,
} NfStatus;

/*
 How an optimization run ended.
 */
typedef enum NfTermination {
  NF_TERMINATION_COMPLETED = 0,
  NF_TERMINATION_RESTARTED = 1,
  NF_TERMINATION_DIVERGED = 2,
  NF_TERMINATION_RESTARTS_EXHAUSTED = 3,
} NfTermination;

/*
 Opaque network handle.
 */
typedef struct NfNetwork NfNetwork;

/*
 Optimizer settings. Start from [`nf_optim_config_default`].
 */
typedef struct NfOptimConfig {
  double tau0;
  uint64_t iters;
  uint64_t seed;
  uint64_t trace_stride;
  double restart_shrink;
  uint32_t max_restarts;
  double divergence_factor;
} NfOptimConfig;

typedef struct NfOptimResult {
  double best_f;
  /*
   Iteration of the best iterate, 0 for the initial guess.
   */
  uint64_t best_k;
  uint32_t restarts;
  enum NfTermination termination;
  /*
   Iteration at which the run stopped early, 0 if it completed.
   */
  uint64_t stopped_at;
} NfOptimResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null. The pointer is
 valid until the next call into the library on this thread.
 */
const char *nf_last_error_message(void);

/*
 Library version as a static nul-terminated string.
 */
const char *nf_version(void);

/*
 Builds a network from `m` edges `(edge_u[i], edge_v[i])` with lengths
 `lengths[i]` and `n` vertex sources. `lengths` may be null for unit
 lengths. On success `*out` receives a handle to free with
 [`nf_network_free`].

 # Safety
 Non-null pointers must reference arrays of the stated lengths, and `out`
 must be writable.
 */
enum NfStatus nf_network_new(size_t n,
                             const size_t *edge_u,
                             const size_t *edge_v,
                             const double *lengths,
                             size_t m,
                             const double *sources,
                             struct NfNetwork **out);

/*
 Parses a graph spec JSON document.

 # Safety
 `json` must be a nul-terminated string and `out` writable.
 */
enum NfStatus nf_network_from_json(const char *json, struct NfNetwork **out);

/*
 Releases a network. Null is ignored.

 # Safety
 `net` must be null or a handle from this library not freed before.
 */
void nf_network_free(struct NfNetwork *net);

/*
 Number of vertices, 0 for a null handle.

 # Safety
 `net` must be null or a live handle.
 */
size_t nf_network_vertex_count(const struct NfNetwork *net);

/*
 Number of edges, 0 for a null handle.

 # Safety
 `net` must be null or a live handle.
 */
size_t nf_network_edge_count(const struct NfNetwork *net);

/*
 Solves the Kirchhoff system for conductivities `c` (length = edge count).
 `*solvable` is set to 0 when the sources cannot be routed through the
 support of `c`; pressures and fluxes are then left untouched. Otherwise
 pressures (length = vertex count, zero mean per component) and fluxes
 (length = edge count, positive from `u` to `v`) are written.

 # Safety
 Pointers must reference arrays of the stated lengths.
 */
enum NfStatus nf_solve(const struct NfNetwork *net,
                       const double *c,
                       size_t c_len,
                       double *pressures,
                       size_t pressures_len,
                       double *fluxes,
                       size_t fluxes_len,
                       bool *solvable);

/*
 Energy `E = Σ Q²L/C + (ν/γ) Σ C^γ L`, or `+inf` when unsolvable.

 # Safety
 `c` must reference `c_len` values and `out` be writable.
 */
enum NfStatus nf_energy(const struct NfNetwork *net,
                        const double *c,
                        size_t c_len,
                        double gamma,
                        double nu,
                        double *out);

/*
 Fiedler number of the conductivity Laplacian and its multiplicity.
 `multiplicity` may be null.

 # Safety
 `c` must reference `c_len` values; `value` must be writable.
 */
enum NfStatus nf_fiedler(const struct NfNetwork *net,
                         const double *c,
                         size_t c_len,
                         double *value,
                         size_t *multiplicity);

/*
 Modified energy `F = E − μ ℓ (|V|−1)/2 · f[C]` with `γ = 1`, where `ℓ`
 is the shortest edge length. `+inf` when unsolvable.

 # Safety
 `c` must reference `c_len` values and `out` be writable.
 */
enum NfStatus nf_modified_energy(const struct NfNetwork *net,
                                 const double *c,
                                 size_t c_len,
                                 double nu,
                                 double mu,
                                 double *out);

/*
 Default optimizer settings.
 */
struct NfOptimConfig nf_optim_config_default(void);

/*
 Minimizes `F` with `γ = 1` from a seeded random start. The best
 conductivities go to `best_c` (length = edge count) and the run summary
 to `result`. A divergent run still returns `NF_STATUS_OK`; check
 `result->termination`.

 # Safety
 `config` and `result` must be valid pointers; `best_c` must reference
 `best_c_len` writable values.
 */
enum NfStatus nf_optimize(const struct NfNetwork *net,
                          double nu,
                          double mu,
                          const struct NfOptimConfig *config,
                          double *best_c,
                          size_t best_c_len,
                          struct NfOptimResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NETFORGE_H */
