/* dissent: distributed dissipativity-based controller synthesis.
 *
 * C interface over the C++ core. All functions returning dissent_status set a
 * thread-local message retrievable via dissent_last_error() on failure.
 * Handles are opaque; every *_free accepts NULL.
 */
#ifndef DISSENT_H
#define DISSENT_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  DISSENT_OK = 0,
  DISSENT_ERR_INVALID_ARGUMENT = 1,
  DISSENT_ERR_CONFIG = 2,     /* parse or validation failure (see last_error) */
  DISSENT_ERR_INFEASIBLE = 3, /* no feasible initialization / empty NDT set */
  DISSENT_ERR_SOLVER = 4,
  DISSENT_ERR_IO = 5,
  DISSENT_ERR_INTERNAL = 6
} dissent_status;

typedef struct dissent_config dissent_config;
typedef struct dissent_gains dissent_gains;
typedef struct dissent_result dissent_result;

const char* dissent_version(void);
const char* dissent_last_error(void);
void dissent_string_free(char* s);

/* ---- configuration ---- */
dissent_status dissent_config_load(const char* path, dissent_config** out);
dissent_status dissent_config_parse(const char* text, dissent_config** out);
dissent_status dissent_config_example(const char* name, dissent_config** out);
dissent_status dissent_config_emit(const dissent_config* cfg, char** text_out);
dissent_status dissent_config_save(const dissent_config* cfg, const char* path);
/* keys: "seed", "rho", "max_iters" */
dissent_status dissent_config_override(dissent_config* cfg, const char* key,
                                       const char* value);
int dissent_config_num_agents(const dissent_config* cfg);
void dissent_config_free(dissent_config* cfg);

/* ---- gains ---- */
dissent_status dissent_gains_load_csv(const char* path, dissent_gains** out);
dissent_status dissent_gains_from_result(const dissent_result* r, dissent_gains** out);
int dissent_gains_count(const dissent_gains* g);
dissent_status dissent_gains_dims(const dissent_gains* g, int agent, int* rows,
                                  int* cols);
/* row-major copy; len must be >= rows*cols */
dissent_status dissent_gains_copy(const dissent_gains* g, int agent, double* buf,
                                  size_t len);
dissent_status dissent_gains_save_csv(const dissent_gains* g, const char* path);
void dissent_gains_free(dissent_gains* g);

/* ---- synthesis ---- */
dissent_status dissent_synthesize(const dissent_config* cfg, dissent_result** out);
int dissent_result_converged(const dissent_result* r);
int dissent_result_iterations(const dissent_result* r);
double dissent_result_ndt_max_eig(const dissent_result* r);
dissent_status dissent_result_objectives(const dissent_result* r, int agent,
                                         double* initial, double* final_value);
dissent_status dissent_result_summary(const dissent_result* r, char** out);
dissent_status dissent_result_runlog_csv(const dissent_result* r, char** out);
/* writes gains.csv, runlog.csv, summary.txt and the plot script */
dissent_status dissent_result_write_outputs(const dissent_result* r, const char* dir);
void dissent_result_free(dissent_result* r);

/* ---- certification ---- */
typedef struct {
  int certified;
  int failing_agent; /* -1 when not attributable to one agent */
  double ndt_max_eig;
} dissent_certify_report;
dissent_status dissent_certify(const dissent_config* cfg, const dissent_gains* g,
                               dissent_certify_report* out);

/* ---- validation ---- */
typedef struct {
  int ok;
  int poles_ok;
  int response_ok;
  int diverged;
  double divergence_time;
  double worst_pole_re;
  double terminal_deviation;
} dissent_validate_report;
/* out_dir may be NULL to skip file outputs (response.csv, poles.csv, plots) */
dissent_status dissent_validate(const dissent_config* cfg, const dissent_gains* g,
                                const char* out_dir, dissent_validate_report* out);

/* ---- command-level helpers (shell exit-code contract) ----
 * 0 success (a nonconverged synthesis is still a result), 1 certification or
 * validation failure, 2 invalid configuration, 3 infeasible initialization.
 * overrides: alternating key/value strings, n_overrides pairs.
 */
int dissent_cmd_synthesize(const char* config_path, const char* out_dir,
                           const char* const* overrides, int n_overrides);
int dissent_cmd_certify(const char* config_path, const char* gains_path,
                        const char* const* overrides, int n_overrides);
int dissent_cmd_validate(const char* config_path, const char* gains_path,
                         const char* out_dir, const char* const* overrides,
                         int n_overrides);
int dissent_cmd_example(const char* name, const char* out_path);

#ifdef __cplusplus
}
#endif
#endif /* DISSENT_H */
