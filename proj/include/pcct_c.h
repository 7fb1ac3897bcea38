#ifndef PCCT_C_H_
#define PCCT_C_H_

/* C interface to the pcct library. Every call returns a pcct_status; on
 * failure pcct_last_error() holds a message for the calling thread. Handles
 * are opaque and released with their *_free function. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PCCT_API __declspec(dllexport)
#else
#define PCCT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pcct_status {
  PCCT_OK = 0,
  PCCT_ERR_DIMENSION = 1,
  PCCT_ERR_CONTRACT = 2,
  PCCT_ERR_PARSE = 3,
  PCCT_ERR_IO = 4,
  PCCT_ERR_DIVERGED = 5,
  PCCT_ERR_NULL_ARGUMENT = 6,
  PCCT_ERR_INTERNAL = 7
} pcct_status;

typedef struct pcct_dataset pcct_dataset;
typedef struct pcct_config pcct_config;
typedef struct pcct_model pcct_model;

/* stage is "stage1", "stage2" or "baseline"; tag names the job. */
typedef void (*pcct_epoch_callback)(const char* tag, const char* stage, size_t epoch, double mean_loss,
                                    double seconds, void* user);

PCCT_API const char* pcct_version(void);
PCCT_API const char* pcct_last_error(void);
PCCT_API const char* pcct_status_name(pcct_status status);
PCCT_API void pcct_string_free(char* s);

/* Datasets */
PCCT_API pcct_status pcct_dataset_generate(const char* preset, uint64_t seed, pcct_dataset** out);
PCCT_API pcct_status pcct_dataset_generate_from_spec(const char* spec_json_path, pcct_dataset** out);
PCCT_API pcct_status pcct_dataset_load_csv(const char* path, pcct_dataset** out);
/* Sidecar path may be NULL; it is only written for generated datasets. */
PCCT_API pcct_status pcct_dataset_save(const pcct_dataset* data, const char* csv_path, const char* sidecar_path);
PCCT_API pcct_status pcct_dataset_shape(const pcct_dataset* data, size_t* rows, size_t* dim, size_t* classes);
PCCT_API pcct_status pcct_dataset_class_size(const pcct_dataset* data, size_t class_id, size_t* out);
PCCT_API void pcct_dataset_free(pcct_dataset* data);

/* Configs */
PCCT_API pcct_status pcct_config_default(pcct_config** out);
PCCT_API pcct_status pcct_config_load(const char* path, pcct_config** out);
/* key is "section.name", e.g. "loss.alpha". */
PCCT_API pcct_status pcct_config_set(pcct_config* cfg, const char* key, const char* value);
/* Canonical text of the effective config; release with pcct_string_free. */
PCCT_API pcct_status pcct_config_render(const pcct_config* cfg, char** out);
/* Dataset named by the [data] section. */
PCCT_API pcct_status pcct_config_dataset(const pcct_config* cfg, pcct_dataset** out);
PCCT_API void pcct_config_free(pcct_config* cfg);

/* Experiments; each writes its artifacts into out_dir. mf1_out may be NULL. */
PCCT_API pcct_status pcct_train(const pcct_config* cfg, const pcct_dataset* data, size_t holdout_fold,
                                const char* out_dir, pcct_epoch_callback cb, void* user, double* mf1_out);
PCCT_API pcct_status pcct_evaluate(const char* checkpoint_path, const pcct_dataset* data, size_t small_class_threshold,
                                   const char* out_dir, double* mf1_out);
PCCT_API pcct_status pcct_crossval(const pcct_config* cfg, const pcct_dataset* data, size_t folds, size_t jobs,
                                   const char* out_dir, pcct_epoch_callback cb, void* user, double* mf1_mean_out);
/* axis is "margin" or "dimension". */
PCCT_API pcct_status pcct_sweep(const pcct_config* cfg, const pcct_dataset* data, const char* axis,
                                const double* values, size_t count, size_t jobs, const char* out_dir,
                                pcct_epoch_callback cb, void* user);

/* Models */
PCCT_API pcct_status pcct_model_load(const char* checkpoint_path, pcct_model** out);
PCCT_API pcct_status pcct_model_input_dim(const pcct_model* model, size_t* out);
/* features is rows x dim, row-major; labels receives rows entries. */
PCCT_API pcct_status pcct_model_predict(const pcct_model* model, const double* features, size_t rows, size_t dim,
                                        int* labels);
PCCT_API void pcct_model_free(pcct_model* model);

#ifdef __cplusplus
}
#endif

#endif /* PCCT_C_H_ */
