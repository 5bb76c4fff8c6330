/* C API of the bdb library: a spectral simulator and linear-stability
 * analyzer for the semiconductor Boltzmann equation with a nonlinear
 * BGK collision operator on the torus.
 *
 * All functions return bdb_status; on failure bdb_last_error() holds a
 * thread-local description. Handles are opaque and freed with the matching
 * *_free function (safe on NULL).
 */
#ifndef BDB_H
#define BDB_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bdb_status {
  BDB_OK = 0,
  BDB_ERR_INVALID_ARGUMENT = 1,
  BDB_ERR_INVALID_GRID = 2,
  BDB_ERR_INFEASIBLE = 3,          /* moment target outside the feasible cone */
  BDB_ERR_NO_CONVERGENCE = 4,
  BDB_ERR_NEAR_SINGULAR = 5,
  BDB_ERR_NO_ROOT = 6,
  BDB_ERR_BRANCH_LOST = 7,
  BDB_ERR_DEGENERATE_EIGENVECTOR = 8,
  BDB_ERR_INCOMMENSURABLE_WAVENUMBER = 9,
  BDB_ERR_UNPHYSICAL = 10,
  BDB_ERR_BLOW_UP = 11,            /* expected terminal signal of instability runs */
  BDB_ERR_SATURATED_TOO_FAST = 12,
  BDB_ERR_PROFILE_INVALID = 13,
  BDB_ERR_CONFIG = 14,
  BDB_ERR_CORRUPT_SNAPSHOT = 15,
  BDB_ERR_IO = 16,
  BDB_ERR_INTERNAL = 17
} bdb_status;

typedef struct bdb_grid bdb_grid;
typedef struct bdb_field bdb_field;
typedef struct bdb_sim bdb_sim;

typedef struct bdb_params {
  double eta;   /* Pauli saturation, >= 0 (0 = Maxwell-Boltzmann) */
  double eps0;  /* tunneling rate, > 0 */
  double U;     /* interaction strength */
  double gamma; /* collision frequency, >= 0 */
  int d;        /* spatial dimension, 1 or 2 */
} bdb_params;

const char* bdb_version(void);
/* Message of the last failure on the calling thread; never NULL. */
const char* bdb_last_error(void);

/* --- phase-space grid ---------------------------------------------------- */
bdb_status bdb_grid_create(int d, int nx, int np, double lx, bdb_grid** out);
void bdb_grid_free(bdb_grid* grid);
bdb_status bdb_grid_dims(const bdb_grid* grid, int* d, int* nx, int* np, double* lx);

/* --- Fermi-Dirac equilibrium machinery ------------------------------------ */
bdb_status bdb_moments_forward(const bdb_grid* grid, const bdb_params* params,
                               double lambda0, double lambda1, double* n, double* E);
bdb_status bdb_moments_invert(const bdb_grid* grid, const bdb_params* params,
                              double n, double E, double* lambda0, double* lambda1);
bdb_status bdb_kappa(const bdb_grid* grid, const bdb_params* params,
                     double lambda0, double lambda1, double* out);
bdb_status bdb_instability_margin(const bdb_grid* grid, const bdb_params* params,
                                  double lambda0, double lambda1, double* out);
/* Unique positive root of the critical condition; requires margin > 0. */
bdb_status bdb_critical_alpha(const bdb_grid* grid, const bdb_params* params,
                              double lambda0, double lambda1, double* alpha0);

/* --- distribution fields --------------------------------------------------- */
bdb_status bdb_field_create_equilibrium(const bdb_grid* grid, const bdb_params* params,
                                        double lambda0, double lambda1, bdb_field** out);
bdb_status bdb_field_create_from_data(const bdb_grid* grid, const double* values,
                                      size_t count, bdb_field** out);
void bdb_field_free(bdb_field* field);
/* Borrowed pointer, valid until the field is freed or mutated. */
bdb_status bdb_field_data(const bdb_field* field, const double** data, size_t* count);
bdb_status bdb_field_moments(const bdb_field* field, const bdb_params* params,
                             double* mass, double* energy, double* l2);

/* --- time integration ------------------------------------------------------ */
/* scheme: 0 = Strang, 1 = Lie. mode: 0 = nonlinear, 1 = fixed_F, 2 = linearized
 * (fixed_F/linearized relax toward the lambda_ref equilibrium). */
bdb_status bdb_sim_create(const bdb_field* f0, const bdb_params* params, double dt,
                          int scheme, int mode, int dealias,
                          double lambda_ref0, double lambda_ref1, bdb_sim** out);
bdb_status bdb_sim_advance(bdb_sim* sim, double t_end);
bdb_status bdb_sim_time(const bdb_sim* sim, double* t);
bdb_status bdb_sim_field(const bdb_sim* sim, bdb_field** out);
void bdb_sim_free(bdb_sim* sim);

/* --- snapshot files (bit-exact container) ---------------------------------- */
bdb_status bdb_snapshot_write(const char* path, const bdb_field* field,
                              const bdb_params* params, double t);
bdb_status bdb_snapshot_read(const char* path, bdb_field** field, bdb_params* params,
                             double* t);

/* --- config-driven pipelines ------------------------------------------------ */
/* mode: equilibrium | simulate | stability | illposed | norms. Writes outputs
 * and manifest.json into out_dir; copies the manifest path into the buffer. */
bdb_status bdb_run_scenario(const char* mode, const char* config_path, const char* out_dir,
                            int threads, char* manifest_path, size_t manifest_path_len);

#ifdef __cplusplus
}
#endif

#endif /* BDB_H */
