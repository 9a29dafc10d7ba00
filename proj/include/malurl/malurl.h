/*
 * malurl C API.
 *
 * Every function returns a malurl_status; on failure the message is
 * available from malurl_last_error() on the calling thread until the next
 * call into the library. Models are opaque handles released with
 * malurl_model_free(). A loaded model may be shared between threads for
 * prediction.
 */
#ifndef MALURL_H
#define MALURL_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(MALURL_BUILDING)
#    define MALURL_API __declspec(dllexport)
#  else
#    define MALURL_API __declspec(dllimport)
#  endif
#else
#  define MALURL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum malurl_status {
  MALURL_OK = 0,
  MALURL_ERR_USAGE = 1,        /* bad configuration or arguments */
  MALURL_ERR_DATA = 2,         /* unreadable or malformed dataset */
  MALURL_ERR_MODEL = 3,        /* unreadable or incompatible model file */
  MALURL_ERR_INVALID_INPUT = 4,/* e.g. an empty URL */
  MALURL_ERR_INTERNAL = 5
} malurl_status;

#define MALURL_MAX_CLASSES 4
#define MALURL_CLASS_NAME_MAX 16

typedef struct malurl_model malurl_model;

typedef struct malurl_prediction {
  int label;
  char class_name[MALURL_CLASS_NAME_MAX];
  size_t num_scores;
  double scores[MALURL_MAX_CLASSES];
} malurl_prediction;

/* Receives one progress line per call; `user` is passed through. */
typedef void (*malurl_log_fn)(const char* line, void* user);

MALURL_API const char* malurl_version(void);
MALURL_API const char* malurl_last_error(void);

/* Every configuration key with its default value, one per line. */
MALURL_API const char* malurl_config_reference(void);

/* Parses a config file without training; NULL or "" means defaults. */
MALURL_API malurl_status malurl_config_check(const char* config_path);

/* Writes the per-URL lexical feature CSV for a labeled dataset. */
MALURL_API malurl_status malurl_featurize(const char* data_csv, const char* out_csv);

/* Trains on `data_csv`. `config_path` may be NULL (defaults); when
 * `report_dir` is non-NULL the reports and split manifests are written
 * there. `log` may be NULL. */
MALURL_API malurl_status malurl_train(const char* data_csv, const char* config_path,
                                      const char* report_dir, malurl_log_fn log, void* user,
                                      malurl_model** out);

MALURL_API malurl_status malurl_model_load(const char* path, malurl_model** out);
MALURL_API malurl_status malurl_model_save(const malurl_model* model, const char* path);
MALURL_API void malurl_model_free(malurl_model* model);

/* Number of output classes (2 in binary mode, 4 in multiclass mode). */
MALURL_API size_t malurl_model_num_classes(const malurl_model* model);
MALURL_API const char* malurl_model_class_name(const malurl_model* model, size_t label);

MALURL_API malurl_status malurl_predict(const malurl_model* model, const char* url,
                                        malurl_prediction* out);

/* Scores a labeled CSV and writes report.csv, confusion.csv and report.txt
 * into `report_dir` (skipped when NULL). `accuracy` may be NULL. */
MALURL_API malurl_status malurl_evaluate(const malurl_model* model, const char* data_csv,
                                         const char* report_dir, double* accuracy);

#ifdef __cplusplus
}
#endif

#endif /* MALURL_H */
