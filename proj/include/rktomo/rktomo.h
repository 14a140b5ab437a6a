/* rktomo: photoelectron density-matrix tomography from XUV/IR delay scans.
 *
 * Plain C interface over the C++ library. Objects are opaque handles owned by
 * the caller and released with the matching *_free function. Every call
 * returns an rkt_status; on failure rkt_last_error() gives a message that
 * stays valid until the next call on the same thread. Strings returned
 * through char** outputs are heap-allocated and released with rkt_string_free.
 */
#ifndef RKTOMO_H
#define RKTOMO_H

#include <stddef.h>

#if defined(_WIN32)
#define RKT_API __declspec(dllexport)
#else
#define RKT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rkt_status {
  RKT_OK = 0,
  RKT_E_DOMAIN = 1,
  RKT_E_CONFIG = 2,
  RKT_E_SCHEMA = 3,
  RKT_E_DATA = 4,
  RKT_E_DEGENERATE = 5,
  RKT_E_COVERAGE = 6,
  RKT_E_CONTRACT = 7,
  RKT_E_NOT_FOUND = 8,
  RKT_E_IO = 9,
  RKT_E_INTERNAL = 10,
  RKT_E_ARGUMENT = 11 /* null or wrong-kind handle, bad buffer size or invalid enum */
} rkt_status;

typedef enum rkt_mode { RKT_MODE_SCENARIO = -1, RKT_MODE_INTERFERENCE = 0, RKT_MODE_FULL = 1 } rkt_mode;

typedef enum rkt_grid_kind {
  RKT_GRID_INTERFEROGRAM = 0,
  RKT_GRID_FOURIER_MAP = 1,
  RKT_GRID_DENSITY_MATRIX = 2
} rkt_grid_kind;

typedef struct rkt_scenario rkt_scenario;
typedef struct rkt_grid rkt_grid;

typedef struct rkt_grid_info {
  rkt_grid_kind kind;
  int rows; /* tau, omega_tau or eps2 */
  int cols; /* E_f or eps1 */
  int is_complex;
  double row_min, row_max;
  double col_min, col_max;
} rkt_grid_info;

typedef void (*rkt_warning_fn)(const char* message, void* user);

RKT_API const char* rkt_version(void);
RKT_API const char* rkt_status_name(rkt_status status);
RKT_API const char* rkt_last_error(void);
RKT_API void rkt_string_free(char* s);

/* Replaces the stderr warning sink; pass NULL to restore it. */
RKT_API void rkt_set_warning_callback(rkt_warning_fn fn, void* user);

/* Scenarios. `path` may also be "bundled:<name>". */
RKT_API rkt_status rkt_scenario_load(const char* path, rkt_scenario** out);
RKT_API rkt_status rkt_scenario_parse(const char* json_text, rkt_scenario** out);
RKT_API rkt_status rkt_scenario_clone(const rkt_scenario* s, rkt_scenario** out);
RKT_API rkt_status rkt_scenario_bundled_names(char** newline_separated);
RKT_API rkt_status rkt_scenario_set_number(rkt_scenario* s, const char* name, double value);
RKT_API rkt_status rkt_scenario_set_option(rkt_scenario* s, const char* name, const char* value);
/* Current value of an option accepted by rkt_scenario_set_option. */
RKT_API rkt_status rkt_scenario_get_option(const rkt_scenario* s, const char* name, char** out);
RKT_API rkt_status rkt_scenario_name(const rkt_scenario* s, char** out);
RKT_API rkt_status rkt_scenario_to_json(const rkt_scenario* s, char** out);
/* Output requests of the scenario as "kind<TAB>file" lines. */
RKT_API rkt_status rkt_scenario_outputs(const rkt_scenario* s, char** out);
RKT_API void rkt_scenario_free(rkt_scenario* s);

/* Forward model and reconstruction. */
RKT_API rkt_status rkt_simulate(const rkt_scenario* s, rkt_mode mode, rkt_grid** interferogram);
RKT_API rkt_status rkt_theory_matrix(const rkt_scenario* s, int oversample, rkt_grid** rho);
/* fourier_map may be NULL; otherwise it receives the corrected single-lobe map. */
RKT_API rkt_status rkt_reconstruct(const rkt_scenario* s, const rkt_grid* interferogram, rkt_grid** rho,
                                   rkt_grid** fourier_map, char** report_json);

/* Sweep over a numeric parameter (see rkt_scenario_set_number). Produces a
 * tab-separated table; points that fail become error rows. */
RKT_API rkt_status rkt_sweep(const rkt_scenario* s, const char* parameter, const double* values, size_t count,
                             int threads, char** table_tsv, char** figure_svg);

/* Metrics on density-matrix grids. */
RKT_API rkt_status rkt_fidelity(const rkt_grid* a, const rkt_grid* b, double* out);
RKT_API rkt_status rkt_purity(const rkt_grid* rho, double* out);
RKT_API rkt_status rkt_metrics_json(const rkt_grid* rho, const rkt_grid* reference, char** out);

/* Brute-force quadrature cross-check of the closed-form amplitudes. */
RKT_API rkt_status rkt_oracle_check(const rkt_scenario* s, int points, double* max_rel_error, char** report_json);

/* Grids. */
RKT_API rkt_status rkt_grid_read(const char* path, rkt_grid** out);
RKT_API rkt_status rkt_grid_write(const rkt_grid* g, const char* path, int binary);
RKT_API rkt_status rkt_grid_info_get(const rkt_grid* g, rkt_grid_info* out);
/* Copies the row-major values; complex grids interleave re, im. `count`
 * must equal rows * cols (times two for complex). */
RKT_API rkt_status rkt_grid_copy_values(const rkt_grid* g, double* buffer, size_t count);
/* |value| heatmap as PNG. */
RKT_API rkt_status rkt_grid_write_png(const rkt_grid* g, const char* path);
RKT_API void rkt_grid_free(rkt_grid* g);

#ifdef __cplusplus
}
#endif

#endif
