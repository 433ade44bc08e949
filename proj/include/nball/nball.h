/* C interface to the n-ball backstepping library. */
#ifndef NBALL_H
#define NBALL_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define NBALL_API __attribute__((visibility("default")))
#else
#define NBALL_API
#endif

typedef enum nball_status {
    NBALL_OK = 0,
    NBALL_ERR_ARGUMENT = 1,
    NBALL_ERR_CONFIG = 2,
    NBALL_ERR_VERIFICATION = 3,
    NBALL_ERR_SOLVER = 4,
    NBALL_ERR_IO = 5,
    NBALL_ERR_INTERNAL = 6
} nball_status;

typedef struct nball_config nball_config;
typedef struct nball_result nball_result;

typedef struct nball_params {
    double epsilon;
    double lambda;
    double radius;
    int dimension;
    double target_damping;
} nball_params;

/* Message for the last failing call on this thread; never NULL. */
NBALL_API const char* nball_last_error(void);
NBALL_API const char* nball_version(void);

NBALL_API nball_status nball_config_create(nball_config** out);
NBALL_API void nball_config_destroy(nball_config* cfg);
/* Replaces cfg with the parsed file (defaults for absent keys). */
NBALL_API nball_status nball_config_load_file(nball_config* cfg, const char* path);
NBALL_API nball_status nball_config_set(nball_config* cfg, const char* key, const char* value);
/* Copies the value text into buf; *needed receives the length including the terminator. */
NBALL_API nball_status nball_config_get(const nball_config* cfg, const char* key, char* buf, size_t len,
                                        size_t* needed);
NBALL_API nball_status nball_config_to_json(const nball_config* cfg, char* buf, size_t len, size_t* needed);

/* Runs simulate, verify-kernels, verify-transforms or cross-validate.
   A failed verification still returns NBALL_OK with exit code 3 in the result. */
NBALL_API nball_status nball_run(const nball_config* cfg, const char* command, nball_result** out);
NBALL_API int nball_result_exit_code(const nball_result* res);
NBALL_API const char* nball_result_summary(const nball_result* res);
NBALL_API void nball_result_destroy(nball_result* res);

/* kind: 0 control, 1 inverse, 2 observer, 3 observer inverse. */
NBALL_API nball_status nball_kernel(const nball_params* p, int kind, int l, double r, double rho, double* out);
NBALL_API nball_status nball_injection_gain(const nball_params* p, int l, double r, double* out);
NBALL_API nball_status nball_threshold(const nball_params* p, int l, double* out);
NBALL_API nball_status nball_bessel_i1(double x, double* out);
NBALL_API nball_status nball_bessel_j1(double x, double* out);

#ifdef __cplusplus
}
#endif

#endif
