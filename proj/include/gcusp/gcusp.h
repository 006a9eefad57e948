#ifndef GCUSP_H
#define GCUSP_H

/* C interface to the generalized-cusp scattering library.
 *
 * Handles are opaque and owned by the caller (release with the matching
 * destroy function). Functions return a gcusp_status; on failure the message
 * is available from gcusp_last_error() on the same thread until the next call.
 * Complex numbers are passed as separate real and imaginary parts. */

#include <stddef.h>

#if defined(_WIN32)
#define GCUSP_API __declspec(dllexport)
#else
#define GCUSP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gcusp_status {
    GCUSP_OK = 0,
    GCUSP_CHECK_FAILED = 1,
    GCUSP_PARSE_ERROR = 2,
    GCUSP_INVALID_INPUT = 3,
    GCUSP_REGIME_ERROR = 4,
    GCUSP_POLE = 5,
    GCUSP_INTERNAL_ERROR = 6
} gcusp_status;

typedef enum gcusp_sector { GCUSP_ALPHA = 0, GCUSP_BETA = 1 } gcusp_sector;

typedef struct gcusp_model gcusp_model;
typedef struct gcusp_config gcusp_config;

GCUSP_API const char* gcusp_version(void);
GCUSP_API const char* gcusp_last_error(void);

/* Subcommand catalogue. Strings are static. */
GCUSP_API size_t gcusp_command_count(void);
GCUSP_API const char* gcusp_command_name(size_t index);
/* Options of a command followed by the common ones; NULL past the end or for an unknown command. */
GCUSP_API const char* gcusp_command_option(const char* command, size_t index);

/* Run configuration: option keys are the long option names without dashes. */
GCUSP_API gcusp_status gcusp_config_create(const char* command, gcusp_config** out);
GCUSP_API gcusp_status gcusp_config_set(gcusp_config* config, const char* key, const char* value);
GCUSP_API void gcusp_config_destroy(gcusp_config* config);
/* Validates and executes; artifacts go to the "output" option or stdout, diagnostics to stderr.
 * Returns the exit status: 0 ok, 1 check failed, 2 parse error, 3 validation error, 4 numerical regime. */
GCUSP_API int gcusp_config_run(const gcusp_config* config);

/* Model manifold from INI text or a file. */
GCUSP_API gcusp_status gcusp_model_parse(const char* ini_text, gcusp_model** out);
GCUSP_API gcusp_status gcusp_model_load(const char* path, gcusp_model** out);
GCUSP_API void gcusp_model_destroy(gcusp_model* model);
GCUSP_API int gcusp_model_channels(const gcusp_model* model, gcusp_sector sector);

/* C_z as m x m row-major (re, im) pairs; capacity counts doubles and must be at least 2 m^2. */
GCUSP_API gcusp_status gcusp_scattering_matrix(const gcusp_model* model, double re_z, double im_z, gcusp_sector sector,
                                               double* out, size_t capacity);
GCUSP_API gcusp_status gcusp_unitarity_defects(const gcusp_model* model, double re_z, double im_z,
                                               gcusp_sector sector, double* unitarity, double* conjugation);
GCUSP_API gcusp_status gcusp_functional_equation_defect(const gcusp_model* model, double re_z, double im_z,
                                                        gcusp_sector sector, double* defect);

/* H^(kind)_b(e^{z/2} x), kind 1 or 2. */
GCUSP_API gcusp_status gcusp_hankel(int kind, double b, double re_z, double im_z, double x, double* re, double* im);
/* -H^(2)_order(l r) / H^(1)_order(l r), l = e^{z/2}. */
GCUSP_API gcusp_status gcusp_bare_cusp_coefficient(double order, double re_z, double im_z, double r, double* re,
                                                   double* im);

#ifdef __cplusplus
}
#endif

#endif
