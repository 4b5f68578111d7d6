#ifndef SELPROP_H
#define SELPROP_H

/* C interface to the selprop dynamic-graph learner. Every function
 * returns a status code; on failure selprop_last_error() describes the
 * problem (per thread, valid until the next call on that thread). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SELPROP_API __declspec(dllexport)
#else
#define SELPROP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum selprop_status {
    SELPROP_OK = 0,
    SELPROP_ERR_INVALID_ARGUMENT = 1,
    SELPROP_ERR_RUNTIME = 2,
    SELPROP_ERR_PARSE = 3,
    SELPROP_ERR_ORDER = 4,
    SELPROP_ERR_SHAPE = 5,
    SELPROP_ERR_NUMERIC = 6,
    SELPROP_ERR_CHECK_FAILED = 7,
    SELPROP_ERR_OUT_OF_MEMORY = 8,
    SELPROP_ERR_INTERNAL = 9
} selprop_status;

typedef struct selprop_config selprop_config;
typedef struct selprop_dataset selprop_dataset;
typedef struct selprop_model selprop_model;

/* Receives human-readable progress and result lines. */
typedef void (*selprop_report_fn)(const char* line, void* user);

SELPROP_API const char* selprop_version(void);
SELPROP_API const char* selprop_last_error(void);
SELPROP_API const char* selprop_status_string(selprop_status status);

/* configuration */
SELPROP_API selprop_status selprop_config_create(selprop_config** out);
SELPROP_API void selprop_config_destroy(selprop_config* cfg);
/* Merges a flat JSON object from a file; unknown keys are an error. */
SELPROP_API selprop_status selprop_config_load_json(selprop_config* cfg, const char* path);
SELPROP_API selprop_status selprop_config_parse_json(selprop_config* cfg, const char* text);
/* Sets one key from text; list values are comma separated. */
SELPROP_API selprop_status selprop_config_set(selprop_config* cfg, const char* key, const char* value);
/* Copies the effective config as JSON into buf (NUL terminated); *needed gets the required size. */
SELPROP_API selprop_status selprop_config_to_json(const selprop_config* cfg, char* buf, size_t cap, size_t* needed);
/* 16 hex digits plus NUL. */
SELPROP_API selprop_status selprop_config_hash(const selprop_config* cfg, char out[17]);
SELPROP_API size_t selprop_config_key_count(void);
SELPROP_API const char* selprop_config_key_name(size_t index);

/* datasets */
typedef struct selprop_dataset_info {
    size_t n_nodes;
    size_t n_events;
    size_t d_e;
    size_t train_end;
    size_t val_end;
    size_t n_inductive;
    int bipartite;
} selprop_dataset_info;

/* format: "jodie_csv" or "edge_list" */
SELPROP_API selprop_status selprop_dataset_load(const char* path, const char* format, selprop_dataset** out);
SELPROP_API void selprop_dataset_destroy(selprop_dataset* ds);
SELPROP_API selprop_status selprop_dataset_info_get(const selprop_dataset* ds, selprop_dataset_info* info);

/* experiment commands; outputs go to the config's `out` directory */
typedef struct selprop_metrics {
    double mrr;
    double ap;
    double auc;
    int has_mrr;
    int has_ap;
    int has_auc;
    size_t n_edges;
    double update_rate;
    double neighbor_update_rate;
} selprop_metrics;

SELPROP_API selprop_status selprop_train(const selprop_config* cfg, selprop_report_fn report, void* user);
SELPROP_API selprop_status selprop_evaluate(const selprop_config* cfg, selprop_metrics* out, selprop_report_fn report,
                                            void* user);
SELPROP_API selprop_status selprop_ablate(const selprop_config* cfg, selprop_report_fn report, void* user);
SELPROP_API selprop_status selprop_noise(const selprop_config* cfg, selprop_report_fn report, void* user);
SELPROP_API selprop_status selprop_sweep_k(const selprop_config* cfg, selprop_report_fn report, void* user);
SELPROP_API selprop_status selprop_synth(const selprop_config* cfg, selprop_report_fn report, void* user);

typedef struct selprop_gradcheck_options {
    size_t trials;        /* 0: default (50) */
    uint64_t seed;
    const char* corrupt;  /* NULL or a parameter name whose gradient is deliberately perturbed */
} selprop_gradcheck_options;

/* Returns SELPROP_ERR_CHECK_FAILED when any gradient exceeds the tolerance. */
SELPROP_API selprop_status selprop_gradcheck(const selprop_config* cfg, const selprop_gradcheck_options* opt,
                                             selprop_report_fn report, void* user);

/* trained models */
SELPROP_API selprop_status selprop_model_load(const selprop_dataset* ds, const char* checkpoint_path,
                                              selprop_model** out);
SELPROP_API void selprop_model_destroy(selprop_model* model);
/* sigmoid(x_src . x_dst) on the current embedding table */
SELPROP_API selprop_status selprop_model_score(const selprop_model* model, uint32_t src, uint32_t dst, double* out);
SELPROP_API selprop_status selprop_model_embedding(const selprop_model* model, uint32_t node, double* buf, size_t cap,
                                                   size_t* dim);

#ifdef __cplusplus
}
#endif

#endif
