/*
 * credanno: sparse seeding, semi-supervised active learning and quenching
 * for hierarchical linear predictors over precomputed feature embeddings.
 *
 * Plain C interface. Every object is an opaque handle owned by the caller
 * and released with its matching *_free function. Functions return a
 * cra_status; on failure cra_last_error() describes the problem. The error
 * text is per thread and valid until the next call on that thread.
 */
#ifndef CREDANNO_H
#define CREDANNO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CREDANNO_BUILDING)
#    define CRA_API __declspec(dllexport)
#  else
#    define CRA_API __declspec(dllimport)
#  endif
#else
#  define CRA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cra_status {
  CRA_OK = 0,
  CRA_E_INVALID_ARGUMENT = 1, /* null handle, bad length, out-of-range value */
  CRA_E_IO = 2,               /* file could not be read or written */
  CRA_E_FORMAT = 3,           /* malformed data, checkpoint or dataset file */
  CRA_E_CONFIG = 4,           /* unknown key, bad value, violated constraint */
  CRA_E_RUNTIME = 5           /* training/evaluation failure, e.g. budget exhausted */
} cra_status;

typedef enum cra_format { CRA_FORMAT_JSON = 0, CRA_FORMAT_TEXT = 1, CRA_FORMAT_CSV = 2 } cra_format;

typedef struct cra_config cra_config;
typedef struct cra_dataset cra_dataset;
typedef struct cra_predictor cra_predictor;
typedef struct cra_report cra_report;

CRA_API const char* cra_version(void);
CRA_API const char* cra_last_error(void);
/* Enum identifier, e.g. "CRA_E_CONFIG". */
CRA_API const char* cra_status_name(cra_status status);

/* Strings returned through char** out-parameters are released with this. */
CRA_API void cra_string_free(char* s);

/* ---- configuration: flat `key = value` text ---------------------------- */

/* Defaults for every key. */
CRA_API cra_status cra_config_new(cra_config** out);
/* Parses and validates a config file. */
CRA_API cra_status cra_config_load(const char* path, cra_config** out);
/* Parses a config file, applies `key=value` overrides in order, then
 * validates. A missing or unreadable file is a CRA_E_CONFIG error. */
CRA_API cra_status cra_config_load_overrides(const char* path, const char* const* overrides, size_t n_overrides,
                                             cra_config** out);
/* Sets one key; the value is checked for type but cross-key constraints are
 * only enforced by cra_config_validate and by the operations. */
CRA_API cra_status cra_config_set(cra_config* cfg, const char* key, const char* value);
CRA_API cra_status cra_config_get(const cra_config* cfg, const char* key, char** value);
CRA_API cra_status cra_config_validate(const cra_config* cfg);
/* Every key with its resolved value; parsing it reproduces the config. */
CRA_API cra_status cra_config_echo(const cra_config* cfg, char** text);
CRA_API void cra_config_free(cra_config* cfg);

/* ---- datasets ------------------------------------------------------------ */

/* Loads the feature/annotation/split files named in the config, or
 * generates the synthetic dataset when no feature file is configured. */
CRA_API cra_status cra_dataset_from_config(const cra_config* cfg, cra_dataset** out);
/* Writes features.csv, annotations.csv, split.csv and schema.txt, then a
 * manifest.json covering every file in `dir`. */
CRA_API cra_status cra_dataset_write(const cra_dataset* ds, const char* dir);
CRA_API cra_status cra_dataset_shape(const cra_dataset* ds, size_t* n_train, size_t* n_test, size_t* dim,
                                     size_t* n_attributes);
CRA_API void cra_dataset_free(cra_dataset* ds);

/* ---- experiments --------------------------------------------------------- */

/* Runs n_repeats seeded repeats of the configured mechanism and writes the
 * run directory (config echo, traces, per-status checkpoints, reports). */
CRA_API cra_status cra_train(const cra_config* cfg, const cra_dataset* ds, const char* out_dir, cra_report** out);
/* Runs the five-row component ablation over the configured budgets. */
CRA_API cra_status cra_ablate(const cra_config* cfg, const cra_dataset* ds, const char* out_dir, cra_report** out);

/* ---- predictors ---------------------------------------------------------- */

/* `path` is a checkpoint manifest (.json) written by cra_train. */
CRA_API cra_status cra_predictor_load(const char* path, cra_predictor** out);
CRA_API cra_status cra_predictor_dims(const cra_predictor* p, size_t* dim, size_t* n_attributes);
/* One forward pass. `attribute_labels` receives n_attributes argmax labels
 * and may be null when n_attributes is 0. */
CRA_API cra_status cra_predictor_predict(const cra_predictor* p, const double* features, size_t dim,
                                         int* malignancy, double* confidence, int* attribute_labels,
                                         size_t n_attributes);
/* Scores the test split; writes eval.json/eval.txt when out_dir is non-null. */
CRA_API cra_status cra_predictor_evaluate(const cra_predictor* p, const cra_dataset* ds, const char* out_dir,
                                          cra_report** out);
CRA_API void cra_predictor_free(cra_predictor* p);

/* ---- reports ------------------------------------------------------------- */

CRA_API cra_status cra_report_render(const cra_report* r, cra_format format, char** out);
/* Headline numbers: mean and sample std of final malignancy accuracy (%). */
CRA_API cra_status cra_report_malignancy(const cra_report* r, double* mean, double* std);
/* Free-form notes from the run (partial segments, empty pseudo sets). */
CRA_API cra_status cra_report_notes(const cra_report* r, char** out);
CRA_API void cra_report_free(cra_report* r);

#ifdef __cplusplus
}
#endif

#endif /* CREDANNO_H */
