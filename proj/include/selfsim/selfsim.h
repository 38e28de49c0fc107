#ifndef SELFSIM_SELFSIM_H
#define SELFSIM_SELFSIM_H

/* C interface to the selfsim library. Handles are opaque; every call that
   can fail returns an ssim_status and leaves a message for ssim_last_error
   on the calling thread. */

#include <stddef.h>

#if defined(_WIN32)
#define SSIM_API __declspec(dllexport)
#else
#define SSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ssim_status {
  SSIM_OK = 0,
  SSIM_ERR_CONFIG = 1,          /* malformed or inconsistent configuration */
  SSIM_ERR_NONCONVERGENCE = 2,  /* iteration cap hit before tolerance */
  SSIM_ERR_RESOURCE = 3,        /* workload cap exceeded */
  SSIM_ERR_ARGUMENT = 4,        /* null handle, bad key, bad index */
  SSIM_ERR_COMPATIBILITY = 5,   /* s m = m fails */
  SSIM_ERR_INTERNAL = 6
} ssim_status;

typedef struct ssim_config ssim_config;
typedef struct ssim_result ssim_result;

SSIM_API const char* ssim_version(void);
/* Message of the last failed call on this thread; "" after success. */
SSIM_API const char* ssim_last_error(void);
SSIM_API const char* ssim_status_name(ssim_status s);

SSIM_API size_t ssim_builtin_count(void);
SSIM_API const char* ssim_builtin_name(size_t i);

/* Empty config for one command (attractor, measure, fourier, weyl, padic). */
SSIM_API ssim_status ssim_config_new(const char* command, ssim_config** out);
/* Config from a JSON document; keys are checked but values are validated
   by ssim_config_validate or ssim_run. */
SSIM_API ssim_status ssim_config_from_json(const char* json, ssim_config** out);
SSIM_API void ssim_config_free(ssim_config* cfg);

/* Keys as in the JSON document. A string value for "system" names a
   builtin; ssim_config_set_json sets any key from a JSON fragment. */
SSIM_API ssim_status ssim_config_set_string(ssim_config* cfg, const char* key, const char* value);
SSIM_API ssim_status ssim_config_set_double(ssim_config* cfg, const char* key, double value);
SSIM_API ssim_status ssim_config_set_int(ssim_config* cfg, const char* key, long long value);
SSIM_API ssim_status ssim_config_set_doubles(ssim_config* cfg, const char* key, const double* values, size_t n);
SSIM_API ssim_status ssim_config_set_json(ssim_config* cfg, const char* key, const char* json);
/* Serialized config; owned by cfg, valid until the next call on it. */
SSIM_API const char* ssim_config_json(ssim_config* cfg);

SSIM_API ssim_status ssim_config_validate(const ssim_config* cfg);
/* Validates, computes and writes the output files. *out is set only on
   success. */
SSIM_API ssim_status ssim_run(const ssim_config* cfg, ssim_result** out);
SSIM_API void ssim_result_free(ssim_result* res);

SSIM_API int ssim_result_pass(const ssim_result* res);
SSIM_API size_t ssim_result_file_count(const ssim_result* res);
SSIM_API const char* ssim_result_file(const ssim_result* res, size_t i);
SSIM_API size_t ssim_result_line_count(const ssim_result* res);
SSIM_API const char* ssim_result_line(const ssim_result* res, size_t i);
SSIM_API ssim_status ssim_result_value(const ssim_result* res, const char* key, double* out);

#ifdef __cplusplus
}
#endif

#endif
