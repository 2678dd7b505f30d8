#ifndef SPARSYM_SPARSYM_H
#define SPARSYM_SPARSYM_H

#include <stddef.h>
#include <stdint.h>

#if defined(SPARSYM_BUILDING_LIBRARY)
#define SPARSYM_API __attribute__((visibility("default")))
#else
#define SPARSYM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sparsym_status {
  SPARSYM_OK = 0,
  SPARSYM_ERR_INVALID_ARGUMENT = 1,
  SPARSYM_ERR_CONFIG = 2,
  SPARSYM_ERR_IO = 3,
  SPARSYM_ERR_PARSE = 4,
  SPARSYM_ERR_SHAPE = 5,
  SPARSYM_ERR_NUMERIC = 6,
  SPARSYM_ERR_RUNTIME = 7,
  SPARSYM_ERR_INTERNAL = 8
} sparsym_status;

typedef struct sparsym_network sparsym_network;
typedef struct sparsym_expr sparsym_expr;

SPARSYM_API const char* sparsym_version(void);

/* Message of the last failed call on this thread; "" if none. */
SPARSYM_API const char* sparsym_last_error(void);
SPARSYM_API const char* sparsym_status_name(sparsym_status status);

/* Strings returned through char** out-parameters are owned by the caller. */
SPARSYM_API void sparsym_string_free(char* s);

/* Commands. `out_dir` may be NULL (config value), `seed` is used only when
 * `has_seed` is nonzero. On success *result_json holds the command report. */
SPARSYM_API sparsym_status sparsym_cmd_train(const char* config_path, const char* out_dir,
                                             int has_seed, uint64_t seed, char** result_json);
SPARSYM_API sparsym_status sparsym_cmd_scan(const char* config_path, const char* out_dir,
                                            int has_seed, uint64_t seed, char** result_json);
/* `label_columns` is comma separated and only used for CSV datasets; `task` is
 * "regression" or "classification" (NULL means regression). */
SPARSYM_API sparsym_status sparsym_cmd_eval(const char* expressions_path, const char* dataset_path,
                                            const char* label_columns, const char* task,
                                            char** result_json);
SPARSYM_API sparsym_status sparsym_cmd_export(const char* checkpoint_path, const char* out_dir,
                                              char** result_json);

/* Networks (loaded from checkpoints). */
SPARSYM_API sparsym_status sparsym_network_load(const char* checkpoint_path, sparsym_network** out);
SPARSYM_API void sparsym_network_free(sparsym_network* net);
SPARSYM_API sparsym_status sparsym_network_dims(const sparsym_network* net, size_t* n_input,
                                                size_t* n_output);
/* x: [n_rows x n_input] row-major, y: [n_rows x n_output]. Inputs are on the
 * network's (possibly standardized) scale. */
SPARSYM_API sparsym_status sparsym_network_forward(const sparsym_network* net, const double* x,
                                                   size_t n_rows, double* y);
/* out[4] = s_weight, s_input, s_unary, s_binary. */
SPARSYM_API sparsym_status sparsym_network_sparsity(const sparsym_network* net, double out[4]);
/* Simplified expression for `output`, on the raw feature scale. */
SPARSYM_API sparsym_status sparsym_network_unroll(const sparsym_network* net, size_t output,
                                                  sparsym_expr** out);

/* Expressions. `feature_names` may be NULL. */
SPARSYM_API sparsym_status sparsym_expr_parse(const char* text, const char* const* feature_names,
                                              size_t n_features, sparsym_expr** out);
SPARSYM_API sparsym_status sparsym_expr_from_json(const char* json, sparsym_expr** out);
SPARSYM_API void sparsym_expr_free(sparsym_expr* e);
SPARSYM_API sparsym_status sparsym_expr_eval(const sparsym_expr* e, const double* x, size_t n,
                                             double* value);
SPARSYM_API size_t sparsym_expr_complexity(const sparsym_expr* e);
/* display != 0 rounds constants to 2 significant figures. */
SPARSYM_API sparsym_status sparsym_expr_to_text(const sparsym_expr* e, int display, char** text);
SPARSYM_API sparsym_status sparsym_expr_to_json(const sparsym_expr* e, char** json);

#ifdef __cplusplus
}
#endif

#endif
