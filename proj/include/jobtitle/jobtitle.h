/*
 * jobtitle: hierarchical job-posting classification.
 *
 * A coarse linear SVM routes each posting to an occupational major group;
 * a per-group k-NN over title clusters then ranks job-title labels.
 *
 * Conventions
 *   - Every fallible call returns jt_status. On failure the thread-local
 *     message from jt_last_error() describes it and no output handle is
 *     written.
 *   - Handles are opaque and owned by the caller; release each with its
 *     matching *_free function. Passing NULL to a *_free function is a
 *     no-op.
 *   - const char* results borrowed from a handle stay valid until that
 *     handle is freed. char** results are heap strings owned by the caller
 *     and released with jt_string_free.
 *   - Handles are not synchronized. Distinct handles may be used from
 *     different threads; a trained cascade may be shared read-only.
 */
#ifndef JOBTITLE_JOBTITLE_H
#define JOBTITLE_JOBTITLE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(JOBTITLE_BUILDING)
#    define JT_API __declspec(dllexport)
#  else
#    define JT_API __declspec(dllimport)
#  endif
#else
#  define JT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum jt_status {
  JT_OK = 0,
  JT_ERR_IO = 1,          /* unreadable or unwritable path */
  JT_ERR_PARSE = 2,       /* malformed input record or code */
  JT_ERR_VALIDATION = 3,  /* well-formed input violating a data rule */
  JT_ERR_PARAMETER = 4,   /* bad argument or configuration value */
  JT_ERR_DEGENERATE = 5,  /* data too small or uniform to fit a model */
  JT_ERR_CONVERGENCE = 6,
  JT_ERR_INTEGRITY = 7,   /* saved model failed verification */
  JT_ERR_INTERNAL = 8
} jt_status;

typedef struct jt_config jt_config;
typedef struct jt_corpus jt_corpus;
typedef struct jt_clusters jt_clusters;
typedef struct jt_cascade jt_cascade;
typedef struct jt_prediction jt_prediction;
typedef struct jt_report jt_report;

JT_API const char* jt_version(void);
JT_API const char* jt_status_name(jt_status status);
/* Message of the most recent failure on the calling thread; "" if none. */
JT_API const char* jt_last_error(void);
JT_API void jt_string_free(char* s);

/* ---- configuration ---------------------------------------------------- */

JT_API jt_status jt_config_create(jt_config** out);
/* JSON object of config keys; unknown keys are rejected. */
JT_API jt_status jt_config_load(const char* path, jt_config** out);
/* value is a JSON literal; a bare word is taken as a string. */
JT_API jt_status jt_config_set(jt_config* config, const char* key, const char* value);
JT_API jt_status jt_config_to_json(const jt_config* config, char** out);
/* One line per config key with its description. */
JT_API jt_status jt_config_help(char** out);
JT_API void jt_config_free(jt_config* config);

/* ---- corpus ----------------------------------------------------------- */

/* JSON Lines: id, title, and optionally description, requirements, soc,
 * titles. */
JT_API jt_status jt_corpus_load(const char* path, jt_corpus** out);
JT_API jt_status jt_corpus_parse(const char* text, size_t length, jt_corpus** out);
/* A one-document corpus holding only a title. */
JT_API jt_status jt_corpus_from_title(const char* id, const char* title, jt_corpus** out);
JT_API size_t jt_corpus_size(const jt_corpus* corpus);
JT_API const char* jt_corpus_document_id(const jt_corpus* corpus, size_t index);
JT_API void jt_corpus_free(jt_corpus* corpus);

/* ---- title clustering ------------------------------------------------- */

JT_API jt_status jt_cluster_run(const jt_corpus* corpus, const jt_config* config, jt_clusters** out);
JT_API size_t jt_clusters_count(const jt_clusters* clusters);
JT_API const char* jt_clusters_label(const jt_clusters* clusters, size_t index);
JT_API size_t jt_clusters_size(const jt_clusters* clusters, size_t index);
JT_API size_t jt_clusters_unassigned(const jt_clusters* clusters);
JT_API jt_status jt_clusters_save(const jt_clusters* clusters, const char* dir);
JT_API void jt_clusters_free(jt_clusters* clusters);

/* ---- cascade ---------------------------------------------------------- */

JT_API jt_status jt_cascade_train(const jt_corpus* corpus, const jt_config* config, jt_cascade** out);
JT_API jt_status jt_cascade_save(const jt_cascade* cascade, const char* dir);
/* Verifies every checksum in the manifest; JT_ERR_INTEGRITY on mismatch. */
JT_API jt_status jt_cascade_load(const char* dir, jt_cascade** out);
JT_API size_t jt_cascade_group_count(const jt_cascade* cascade);
JT_API const char* jt_cascade_group_key(const jt_cascade* cascade, size_t index);
JT_API size_t jt_cascade_group_documents(const jt_cascade* cascade, size_t index);
/* Number of title clusters in the group's vertical; 0 when it has none. */
JT_API size_t jt_cascade_group_clusters(const jt_cascade* cascade, size_t index);
JT_API int jt_cascade_group_has_vertical(const jt_cascade* cascade, size_t index);
JT_API size_t jt_cascade_warning_count(const jt_cascade* cascade);
JT_API const char* jt_cascade_warning(const jt_cascade* cascade, size_t index);
/* k == 0 uses the configured k. */
JT_API jt_status jt_cascade_classify(const jt_cascade* cascade, const jt_corpus* corpus, size_t index, size_t k,
                                     jt_prediction** out);
JT_API void jt_cascade_free(jt_cascade* cascade);

JT_API const char* jt_prediction_coarse_group(const jt_prediction* prediction);
JT_API int jt_prediction_abstained(const jt_prediction* prediction);
JT_API size_t jt_prediction_count(const jt_prediction* prediction);
JT_API const char* jt_prediction_label(const jt_prediction* prediction, size_t rank);
JT_API double jt_prediction_score(const jt_prediction* prediction, size_t rank);
JT_API void jt_prediction_free(jt_prediction* prediction);

/* ---- evaluation ------------------------------------------------------- */

/* k == 0 uses the configured k. */
JT_API jt_status jt_evaluate(const jt_cascade* cascade, const jt_corpus* corpus, size_t k, jt_report** out);
/* Folds are split with the configured seed; folds == 0 uses the configured
 * fold count. A fold that fails to train yields a partial report with
 * jt_report_is_valid() == 0 rather than an error status. */
JT_API jt_status jt_cross_validate(const jt_corpus* corpus, const jt_config* config, size_t folds, jt_report** out);
/* Metric by name (macro_precision, macro_recall, macro_f1, accuracy,
 * coverage, hamming_loss, zero_one_loss); the fold mean for a
 * cross-validation report. JT_ERR_PARAMETER when absent. */
JT_API jt_status jt_report_metric(const jt_report* report, const char* name, double* out);
JT_API int jt_report_is_valid(const jt_report* report);
JT_API jt_status jt_report_json(const jt_report* report, char** out);
JT_API jt_status jt_report_text(const jt_report* report, char** out);
JT_API jt_status jt_report_save(const jt_report* report, const char* path);
JT_API void jt_report_free(jt_report* report);

#ifdef __cplusplus
}
#endif

#endif /* JOBTITLE_JOBTITLE_H */
