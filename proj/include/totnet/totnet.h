/*
 * totnet.h - C interface to the occlusion-robust ball tracker.
 *
 * Every function returns a totnet_status. On failure, totnet_last_error() returns a message for the
 * calling thread that stays valid until the next call on that thread. Strings handed out through
 * `char**` parameters are owned by the caller and released with totnet_string_free().
 */
#ifndef TOTNET_TOTNET_H
#define TOTNET_TOTNET_H

#include <stdint.h>

#if defined(TOTNET_BUILDING_LIBRARY)
#define TOTNET_API __attribute__((visibility("default")))
#else
#define TOTNET_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum totnet_status {
  TOTNET_OK = 0,
  TOTNET_ERR_INVALID_ARGUMENT = 1, /* null handle, bad value, broken precondition */
  TOTNET_ERR_CONFIG = 2,           /* unknown key, wrong type, failed validation */
  TOTNET_ERR_DATA = 3,             /* malformed annotations, missing frames, empty splits */
  TOTNET_ERR_IO = 4,               /* unreadable or unwritable path */
  TOTNET_ERR_CHECKPOINT = 5,       /* corrupt or incompatible checkpoint */
  TOTNET_ERR_TRAINING = 6,         /* no training data, non-finite loss */
  TOTNET_ERR_INTERNAL = 7
} totnet_status;

typedef struct totnet_config totnet_config;
typedef struct totnet_model totnet_model;

/* Receives each metrics record (one JSON object) as training appends it to the log. */
typedef void (*totnet_progress_fn)(const char* record_json, void* user_data);

TOTNET_API const char* totnet_version(void);
TOTNET_API const char* totnet_last_error(void);
TOTNET_API const char* totnet_status_string(totnet_status status);
TOTNET_API void totnet_string_free(char* s);

/* Configuration */
TOTNET_API totnet_status totnet_config_create(totnet_config** out);
/* An empty file yields the defaults; absent keys keep theirs. */
TOTNET_API totnet_status totnet_config_load(const char* path, totnet_config** out);
TOTNET_API totnet_status totnet_config_save(const totnet_config* config, const char* path);
/* `key` may be dotted ("optimizer.lr"); `json_value` is JSON text ("0.001", "true", "\"cosine\""). */
TOTNET_API totnet_status totnet_config_set(totnet_config* config, const char* key, const char* json_value);
/* Comma-separated subset of "wbce,aug,of"; "" turns all three off. */
TOTNET_API totnet_status totnet_config_apply_ablation(totnet_config* config, const char* toggles);
TOTNET_API totnet_status totnet_config_to_json(const totnet_config* config, char** out_json);
TOTNET_API void totnet_config_destroy(totnet_config* config);

/* Synthetic data. `spec_path` may be NULL for the default benchmark spec; `seed` may be NULL to keep
 * the spec's seed. The summary reports clip count and the visibility histogram. */
TOTNET_API totnet_status totnet_synth_generate(const char* spec_path, const char* out_dir, const uint64_t* seed,
                                               char** out_summary_json);

/* Trains on the train/val splits of the dataset index in `data_dir`. Writes best.ckpt, last.ckpt and
 * metrics.jsonl into `out_dir`. `progress` may be NULL. */
TOTNET_API totnet_status totnet_train(const totnet_config* config, const char* data_dir, const char* out_dir,
                                      int resume, totnet_progress_fn progress, void* user_data,
                                      char** out_summary_json);

/* Models */
TOTNET_API totnet_status totnet_model_load(const char* checkpoint_path, totnet_model** out);
/* Freshly initialized network (seeded from the config), e.g. for throughput measurements. */
TOTNET_API totnet_status totnet_model_create(const totnet_config* config, totnet_model** out);
/* {"parameters": n, "params_millions": "x.xx", "config": {...}} */
TOTNET_API totnet_status totnet_model_info(const totnet_model* model, char** out_json);
TOTNET_API void totnet_model_destroy(totnet_model* model);

/* Evaluates the target frame of every window in `split` ("train", "val" or "test").
 * `report_path` receives the text table and `records_path` one JSON record per sample; either may be NULL. */
TOTNET_API totnet_status totnet_eval(totnet_model* model, const char* data_dir, const char* split,
                                     const char* report_path, const char* records_path, char** out_table,
                                     char** out_summary_json);

/* Tracks every frame of `clip` (frame directory or video). Writes trajectory.csv with columns
 * frame,x,y,confidence,no_ball in source-resolution pixels, plus numbered overlays in
 * `out_dir`/overlay when `overlay` is nonzero. A negative `tau` uses the model's threshold. */
TOTNET_API totnet_status totnet_infer(totnet_model* model, const char* clip, const char* out_dir, double tau,
                                      int overlay, char** out_summary_json);

/* Inference throughput over `n_windows` seeded random windows. */
TOTNET_API totnet_status totnet_bench(totnet_model* model, int n_windows, char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* TOTNET_TOTNET_H */
