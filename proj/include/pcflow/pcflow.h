/*
 * pcflow C API.
 *
 * Opaque handles own their C++ objects; every handle returned through an
 * out-parameter must be released with the matching *_free function.
 * Functions return a pcf_status; on failure pcf_last_error() describes the
 * problem (thread-local, valid until the next call on the same thread).
 */
#ifndef PCFLOW_H
#define PCFLOW_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PCFLOW_BUILDING)
#    define PCFLOW_API __declspec(dllexport)
#  else
#    define PCFLOW_API __declspec(dllimport)
#  endif
#else
#  define PCFLOW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as CLI exit codes. */
typedef enum pcf_status {
  PCF_OK = 0,
  PCF_ERR_PARSE = 2,
  PCF_ERR_VALIDATION = 3,
  PCF_ERR_RUNTIME = 4,
  PCF_ERR_IO = 5,
  PCF_ERR_ARGUMENT = 6
} pcf_status;

typedef enum pcf_termination {
  PCF_REACHED_T_END = 0,
  PCF_STEP_FLOOR_HIT = 1,
  PCF_NOT_KAHLER = 2
} pcf_termination;

typedef struct pcf_config_s* pcf_config;
typedef struct pcf_geometry_s* pcf_geometry;
typedef struct pcf_trajectory_s* pcf_trajectory;
typedef struct pcf_crosscheck_s* pcf_crosscheck;

typedef struct pcf_record {
  double time;
  double dt;
  double sup_F;
  double inf_F;
  double sup_P;
  double entropy;
  double j_neg_ric;
  double k_energy;
  double i_functional;
  double dissipation;
  double calabi_energy;
  double rho_min;
  double volume;
  double poisson_residual;
} pcf_record;

/* Called whenever a run lands on a multiple of flow.checkpoint_every. */
typedef void (*pcf_checkpoint_fn)(double time, const double* phi, size_t n, void* user);

PCFLOW_API const char* pcf_last_error(void);
PCFLOW_API const char* pcf_version(void);

/* ---- configuration ---------------------------------------------------- */
PCFLOW_API pcf_status pcf_config_parse(const char* text, pcf_config* out);
PCFLOW_API pcf_status pcf_config_load(const char* path, pcf_config* out);
/* Overrides one key, re-validating the whole configuration. */
PCFLOW_API pcf_status pcf_config_set(pcf_config cfg, const char* key, const char* value);
/* Writes the effective configuration. *len receives the full length
 * (excluding the terminator); the output is truncated to cap - 1 bytes. */
PCFLOW_API pcf_status pcf_config_to_text(pcf_config cfg, char* buf, size_t cap, size_t* len);
PCFLOW_API const char* pcf_config_output_path(pcf_config cfg);
PCFLOW_API int pcf_config_emit_fields(pcf_config cfg);
PCFLOW_API size_t pcf_config_p_count(pcf_config cfg);
PCFLOW_API void pcf_config_free(pcf_config cfg);

/* ---- geometry ---------------------------------------------------------- */
PCFLOW_API pcf_status pcf_geometry_from_config(pcf_config cfg, pcf_geometry* out);
PCFLOW_API pcf_status pcf_geometry_torus(int nx, int ny, double length, const int* kx,
                                         const int* ky, const double* amplitude, size_t n_modes,
                                         pcf_geometry* out);
PCFLOW_API pcf_status pcf_geometry_sphere(int nmu, pcf_geometry* out);
PCFLOW_API size_t pcf_geometry_size(pcf_geometry geom);
PCFLOW_API double pcf_geometry_volume(pcf_geometry geom);
PCFLOW_API void pcf_geometry_free(pcf_geometry geom);

/* ---- initial data and checkpoints -------------------------------------- */
PCFLOW_API pcf_status pcf_initial_potential(pcf_config cfg, pcf_geometry geom, double* phi,
                                            size_t n);
PCFLOW_API pcf_status pcf_checkpoint_write(const char* path, pcf_geometry geom, double time,
                                           const double* phi, size_t n);
PCFLOW_API pcf_status pcf_checkpoint_read(const char* path, pcf_geometry geom, double* time,
                                          double* phi, size_t n);

/* ---- flows ------------------------------------------------------------- */
PCFLOW_API pcf_status pcf_run(pcf_config cfg, pcf_geometry geom, const double* phi0, size_t n,
                              double t0, pcf_checkpoint_fn on_checkpoint, void* user,
                              pcf_trajectory* out);
PCFLOW_API pcf_termination pcf_trajectory_status(pcf_trajectory traj);
PCFLOW_API long pcf_trajectory_steps(pcf_trajectory traj);
PCFLOW_API size_t pcf_trajectory_record_count(pcf_trajectory traj);
PCFLOW_API pcf_status pcf_trajectory_record(pcf_trajectory traj, size_t index, pcf_record* out);
/* Lp probes of record `index` for the p_index-th configured exponent. */
PCFLOW_API pcf_status pcf_trajectory_probe(pcf_trajectory traj, size_t index, size_t p_index,
                                           double* grad_f, double* trace0);
PCFLOW_API size_t pcf_trajectory_state_count(pcf_trajectory traj);
PCFLOW_API pcf_status pcf_trajectory_state(pcf_trajectory traj, size_t index, double* time,
                                           double* phi, size_t n);
PCFLOW_API pcf_status pcf_trajectory_final(pcf_trajectory traj, double* time, double* phi,
                                           size_t n);
PCFLOW_API pcf_status pcf_trajectory_write_csv(pcf_trajectory traj, const char* path);
PCFLOW_API void pcf_trajectory_free(pcf_trajectory traj);

/* PCF and NKRF from the same data with one shared step sequence. */
PCFLOW_API pcf_status pcf_crosscheck_run(pcf_config cfg, pcf_geometry geom, const double* phi0,
                                         size_t n, pcf_crosscheck* out);
PCFLOW_API double pcf_crosscheck_max_divergence(pcf_crosscheck cc);
/* Writes pcf.csv, nkrf.csv and divergence.csv into an existing directory. */
PCFLOW_API pcf_status pcf_crosscheck_write(pcf_crosscheck cc, const char* directory);
PCFLOW_API void pcf_crosscheck_free(pcf_crosscheck cc);

/* Functionals and estimate probes of a single state, written as a one-row CSV. */
PCFLOW_API pcf_status pcf_probe_write(pcf_config cfg, pcf_geometry geom, const double* phi,
                                      size_t n, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* PCFLOW_H */
