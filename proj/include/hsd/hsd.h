/* hsd: hate-speech detection pipeline for Devanagari-script text.
 *
 * C API over the C++ core. All functions return hsd_status; on failure the
 * thread-local message from hsd_last_error() describes the problem. Objects
 * are opaque handles released with their matching *_free function. Strings
 * returned through char** parameters are heap-allocated and must be released
 * with hsd_string_free.
 *
 * Structured parameters and results travel as JSON strings; the schemas are
 * documented in the project README.
 */
#ifndef HSD_H
#define HSD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HSD_API __declspec(dllexport)
#else
#define HSD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hsd_status {
    HSD_OK = 0,
    HSD_ERROR_VALIDATION = 2, /* bad input, malformed file, violated precondition */
    HSD_ERROR_BACKEND = 3,    /* backend unreachable, failed, or lacks a capability */
    HSD_ERROR_INTERNAL = 70
} hsd_status;

typedef struct hsd_corpus hsd_corpus;
typedef struct hsd_model hsd_model;
typedef struct hsd_predictions hsd_predictions;

HSD_API const char* hsd_version(void);

/* Message for the most recent failure on this thread; empty if none. */
HSD_API const char* hsd_last_error(void);

HSD_API void hsd_string_free(char* s);

/* Line-oriented JSON run events. Pass NULL to silence. */
typedef void (*hsd_log_callback)(const char* json_line, void* user_data);
HSD_API void hsd_set_log_callback(hsd_log_callback cb, void* user_data);

/* ---- corpus ------------------------------------------------------------ */

/* format: "csv" | "jsonl"; split: "train" | "evaluation" | "test". */
HSD_API hsd_status hsd_corpus_ingest(const char* path, const char* format, const char* split,
                                     hsd_corpus** out);
HSD_API hsd_status hsd_corpus_export(const hsd_corpus* corpus, const char* path,
                                     const char* format);
/* {"cells": {"hi/0": n, ...}, "residual": n, "total": n, "split": "..."} */
HSD_API hsd_status hsd_corpus_stats_json(const hsd_corpus* corpus, char** out_json);
/* lang: "hi"/"ne" or NULL for any; label: 0/1 or -1 for any. */
HSD_API hsd_status hsd_corpus_filter(const hsd_corpus* corpus, const char* lang, int label,
                                     hsd_corpus** out);
/* remap_ids = 0 requires disjoint id spaces; 1 assigns fresh ids to b. */
HSD_API hsd_status hsd_corpus_merge(const hsd_corpus* a, const hsd_corpus* b, int remap_ids,
                                    hsd_corpus** out);
HSD_API uint64_t hsd_corpus_size(const hsd_corpus* corpus);
HSD_API void hsd_corpus_free(hsd_corpus* corpus);

/* ---- embeddings --------------------------------------------------------- */

HSD_API hsd_status hsd_cosine_similarity(const double* a, const double* b, size_t dim,
                                         double* out);

/* ---- augmentation ------------------------------------------------------- */

/* config_json example (defaults shown):
 *   {"threshold": 0.9, "pivot": "en", "languages_to_augment": ["hi", "ne"],
 *    "duplicate_minority": true, "duplicate_scope": "original_only"}
 * translator_json: {"name": "identity" | "mock" | "http", ...}
 * embedder_json:   {"name": "token-hash" | "http" | "cache-only", ...}
 * out_audit_jsonl: one {"source_id", "augmented_text", "similarity",
 * "accepted"} object per line. out_summary_json: {"input", "accepted",
 * "rejected", "duplicated", "failed", "output"}. */
HSD_API hsd_status hsd_augment(const hsd_corpus* corpus, const char* config_json,
                               const char* translator_json, const char* embedder_json,
                               hsd_corpus** out_corpus, char** out_audit_jsonl,
                               char** out_summary_json);

/* ---- classifiers -------------------------------------------------------- */

/* JSON array of the eight registered model specs M1..M8. */
HSD_API hsd_status hsd_registry_json(char** out_json);

/* spec: a registry id ("M1".."M8") or a full custom spec JSON object.
 * training_json: {"learning_rate"?, "batch_size"?, "epochs", ...}
 * backend_json: {"name": "mock" | "lexicon" | "http", ...} */
HSD_API hsd_status hsd_train(const char* spec, const hsd_corpus* corpus,
                             const char* training_json, const char* backend_json,
                             hsd_model** out);
HSD_API hsd_status hsd_model_metadata_json(const hsd_model* model, char** out_json);
HSD_API hsd_status hsd_model_save(const hsd_model* model, const char* path);
HSD_API hsd_status hsd_model_load(const char* path, const char* backend_json, hsd_model** out);
HSD_API void hsd_model_free(hsd_model* model);

HSD_API hsd_status hsd_predict(const hsd_model* model, const hsd_corpus* corpus,
                               hsd_predictions** out);

/* Submission format: {"index": id, "prediction": 0|1} per line, ascending. */
HSD_API hsd_status hsd_predictions_save(const hsd_predictions* preds, const char* path);
/* model_id may be NULL (defaults to the file stem). */
HSD_API hsd_status hsd_predictions_load(const char* path, const char* model_id,
                                        hsd_predictions** out);
HSD_API uint64_t hsd_predictions_size(const hsd_predictions* preds);
HSD_API void hsd_predictions_free(hsd_predictions* preds);

/* ---- ensemble ----------------------------------------------------------- */

/* 1 if p = 1; else 1 if s = 1; else f. */
HSD_API int hsd_cascade_predict(int p, int s, int f);

/* The three sets must cover identical ids; branch provenance is recorded in
 * the result and written by hsd_predictions_save. */
HSD_API hsd_status hsd_ensemble_run(const hsd_predictions* primary,
                                    const hsd_predictions* secondary,
                                    const hsd_predictions* fallback, hsd_predictions** out);

/* ---- metrics ------------------------------------------------------------ */

/* averaging: "positive_class" (default when NULL) | "macro" | "micro" |
 * "weighted". Result: {"recall", "precision", "f1", "accuracy", "averaging",
 * "degenerate_flags"} */
HSD_API hsd_status hsd_evaluate_json(const hsd_predictions* preds, const hsd_corpus* gold,
                                     const char* averaging, char** out_row_json);

/* rows_json: {"<model id>": {"recall": ..., "precision": ..., "f1": ...,
 * "accuracy": ..., "averaging"?, "degenerate_flags"?}, ...} */
HSD_API hsd_status hsd_render_report_text(const char* rows_json, char** out_text);
HSD_API hsd_status hsd_render_report_json(const char* rows_json, char** out_json);
HSD_API hsd_status hsd_render_report_svg(const char* rows_json, char** out_svg);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* HSD_H */
