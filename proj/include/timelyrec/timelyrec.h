/* C interface to the TimelyRec library. All functions return a tr_status
 * code; 0 means success. On failure tr_last_error() returns a thread-local
 * message describing the problem. Handles are opaque and must be released
 * with their matching *_free function. */
#ifndef TIMELYREC_H
#define TIMELYREC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tr_status {
    TR_OK = 0,
    TR_ERR_INVALID = 1,    /* bad argument or malformed input */
    TR_ERR_IO = 2,         /* file missing or unreadable/unwritable */
    TR_ERR_NUMERIC = 3,    /* NaN/Inf encountered */
    TR_ERR_INFEASIBLE = 4, /* a sampler could not satisfy its constraints */
    TR_ERR_BUFFER = 5,     /* output buffer too small */
    TR_ERR_INTERNAL = 6
} tr_status;

/* Message for the most recent failure on this thread. */
const char* tr_last_error(void);

typedef struct tr_dataset tr_dataset;
typedef struct tr_model tr_model;

/* ---- datasets ---- */

tr_status tr_dataset_load(const char* tsv_path, tr_dataset** out);
void tr_dataset_free(tr_dataset* dataset);

tr_status tr_dataset_counts(const tr_dataset* dataset, int64_t* users, int64_t* items,
                            int64_t* interactions);

/* Filter and normalize an interaction file. Writes the canonical TSV to
 * out_path plus <out_path>.users.vocab and <out_path>.items.vocab. */
tr_status tr_ingest(const char* in_path, const char* out_path,
                    int min_user_interactions, int min_item_interactions,
                    int min_history_span_days);

/* ---- synthetic data ---- */

typedef struct tr_synth_options {
    int users;
    int items;
    int interactions_per_user;
    int items_per_user;
    int plant_hour;        /* boolean */
    int plant_day_of_week; /* boolean */
    int jitter;
    int64_t start_time;
    int span_days;
    uint64_t seed;
    int trend_item; /* -1 disables the trend */
    int64_t trend_onset;
    int64_t trend_window;
    double trend_prob;
} tr_synth_options;

void tr_synth_options_init(tr_synth_options* options);
tr_status tr_synth(const tr_synth_options* options, const char* tsv_path,
                   const char* truth_path /* nullable */);

/* ---- training ---- */

typedef struct tr_train_options {
    int dim;
    int batch_size;
    int history_len;
    int radius_month, radius_day_of_week, radius_date, radius_hour;
    int enable_month, enable_day_of_week, enable_date, enable_hour; /* booleans */
    double learning_rate;
    double dropout;
    int mlp_width;
    int mlp_depth;
    int max_epochs;
    int patience;
    uint64_t seed;
    int split_mode; /* 0 standard, 1 repeat-aware */
    int min_repeat;
    int64_t utc_offset;
    int64_t negative_separation; /* seconds */
    int disable_mate;            /* ablation: zero the timestamp representation */
    int history_encoding_at_target;
} tr_train_options;

void tr_train_options_init(tr_train_options* options);
tr_status tr_train(const tr_dataset* dataset, const tr_train_options* options,
                   const char* checkpoint_path, const char* log_path /* nullable */);

/* ---- models ---- */

tr_status tr_model_load(const char* checkpoint_path, tr_model** out);
void tr_model_free(tr_model* model);

typedef struct tr_eval_options {
    int scenario; /* 0 item, 1 item-timing */
    uint64_t seed;
    int split_mode;
    int min_repeat;
    int64_t negative_separation;
    int use_validation; /* boolean; default evaluates the test positives */
} tr_eval_options;

void tr_eval_options_init(tr_eval_options* options);
/* Writes the fixed-key metrics text into buf (NUL terminated). */
tr_status tr_eval(const tr_model* model, const tr_dataset* dataset,
                  const tr_eval_options* options, char* buf, size_t buf_len);

/* Attention inspection report for one (user, item, time) triple; ids are
 * the external ids from the interaction file. */
tr_status tr_explain(const tr_model* model, const tr_dataset* dataset,
                     const char* user_id, const char* item_id, int64_t time,
                     int split_mode, int min_repeat, char* buf, size_t buf_len);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TIMELYREC_H */
