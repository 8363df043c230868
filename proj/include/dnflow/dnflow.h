#ifndef DNFLOW_DNFLOW_H
#define DNFLOW_DNFLOW_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define DNFLOW_API __attribute__((visibility("default")))
#else
#define DNFLOW_API
#endif

/* Status codes; values 1..5 double as the CLI exit codes. */
typedef enum dnflow_status
{
  DNFLOW_OK = 0,
  DNFLOW_INVALID_ARGUMENT = 1,
  DNFLOW_PARSE = 2,
  DNFLOW_SOLVER = 3,
  DNFLOW_CONDITION = 4,
  DNFLOW_IO = 5,
  DNFLOW_DOMAIN = 6,
  DNFLOW_FIT = 7,
  DNFLOW_INTERNAL = 99
} dnflow_status;

typedef struct dnflow_config dnflow_config;
typedef struct dnflow_trajectory dnflow_trajectory;

/* Message of the last failed call on this thread; "" when none. */
DNFLOW_API const char* dnflow_last_error(void);

/* Strings returned through char** out-parameters are owned by the caller. */
DNFLOW_API void dnflow_string_free(char* s);

DNFLOW_API dnflow_status dnflow_config_parse(const char* text, dnflow_config** out);
DNFLOW_API dnflow_status dnflow_config_load(const char* path, dnflow_config** out);
DNFLOW_API void dnflow_config_free(dnflow_config* cfg);
DNFLOW_API dnflow_status dnflow_config_render(const dnflow_config* cfg, char** out);

/* Overrides; an overridden key is no longer reported as a default. */
DNFLOW_API dnflow_status dnflow_config_set_command(dnflow_config* cfg, const char* command);
DNFLOW_API dnflow_status dnflow_config_set_directory(dnflow_config* cfg, const char* directory);
DNFLOW_API dnflow_status dnflow_config_set_seed(dnflow_config* cfg, uint64_t seed);

/* Runs the configured command. *exit_code receives the process exit code and
   *run_dir (optional) the run directory. The return value is DNFLOW_OK when
   the command succeeded, else the status matching *exit_code. */
DNFLOW_API dnflow_status dnflow_run(const dnflow_config* cfg, int* exit_code, char** run_dir);

/* Integrates the configured problem from its first initial state. */
DNFLOW_API dnflow_status dnflow_integrate(const dnflow_config* cfg, dnflow_trajectory** out);
DNFLOW_API void dnflow_trajectory_free(dnflow_trajectory* traj);
/* Number of recorded time levels (steps + 1). */
DNFLOW_API size_t dnflow_trajectory_levels(const dnflow_trajectory* traj);
DNFLOW_API size_t dnflow_trajectory_nodes(const dnflow_trajectory* traj);
DNFLOW_API dnflow_status dnflow_trajectory_state(const dnflow_trajectory* traj, size_t level,
                                                 double* values, size_t len);
DNFLOW_API dnflow_status dnflow_trajectory_energy(const dnflow_trajectory* traj, size_t level,
                                                  double* t, double* phi, double* lp_norm_p);

DNFLOW_API dnflow_status dnflow_principal_eigenvalue(int n, double length, double* out);

/* Writes the classification label ("attractor for all λ", ...) to *out. */
DNFLOW_API dnflow_status dnflow_classify_exponents(double p, double m, double sigma, double q,
                                                   double q1, double q2, int N, int gradient,
                                                   int single_valued_j, char** out);

/* Writes plot.gp into run_dir; *path (optional) receives its path. */
DNFLOW_API dnflow_status dnflow_emit_plot_script(const char* run_dir, char** path);

#ifdef __cplusplus
}
#endif

#endif
