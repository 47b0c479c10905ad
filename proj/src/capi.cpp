#include "timelyrec/timelyrec.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <string>

#include "timelyrec/data.hpp"
#include "timelyrec/eval.hpp"
#include "timelyrec/model.hpp"
#include "timelyrec/report.hpp"
#include "timelyrec/synth.hpp"
#include "timelyrec/trainer.hpp"

namespace {

thread_local std::string g_last_error;

using namespace timelyrec;

tr_status fail(tr_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

template <typename Fn>
tr_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ContractError& e) {
        return fail(TR_ERR_INVALID, e.what());
    } catch (const IoError& e) {
        return fail(TR_ERR_IO, e.what());
    } catch (const NumericError& e) {
        return fail(TR_ERR_NUMERIC, e.what());
    } catch (const InfeasibleError& e) {
        return fail(TR_ERR_INFEASIBLE, e.what());
    } catch (const std::exception& e) {
        return fail(TR_ERR_INTERNAL, e.what());
    }
}

tr_status copy_text(const std::string& text, char* buf, size_t buf_len) {
    if (!buf || buf_len < text.size() + 1)
        return fail(TR_ERR_BUFFER, "output buffer too small; need " +
                                       std::to_string(text.size() + 1) + " bytes");
    std::memcpy(buf, text.c_str(), text.size() + 1);
    return TR_OK;
}

SplitMode to_split_mode(int mode) {
    if (mode == 0) return SplitMode::Standard;
    if (mode == 1) return SplitMode::RepeatAware;
    throw ContractError("split_mode must be 0 (standard) or 1 (repeat-aware)");
}

}  // namespace

struct tr_dataset {
    timelyrec::Dataset data;
};

struct tr_model {
    timelyrec::Model model;
};

extern "C" {

const char* tr_last_error(void) { return g_last_error.c_str(); }

tr_status tr_dataset_load(const char* tsv_path, tr_dataset** out) {
    return guarded([&]() -> tr_status {
        if (!tsv_path || !out) return fail(TR_ERR_INVALID, "null argument");
        *out = new tr_dataset{load_interactions(tsv_path)};
        return TR_OK;
    });
}

void tr_dataset_free(tr_dataset* dataset) { delete dataset; }

tr_status tr_dataset_counts(const tr_dataset* dataset, int64_t* users, int64_t* items,
                            int64_t* interactions) {
    return guarded([&]() -> tr_status {
        if (!dataset) return fail(TR_ERR_INVALID, "null dataset");
        if (users) *users = dataset->data.n_users();
        if (items) *items = dataset->data.n_items();
        if (interactions)
            *interactions = static_cast<int64_t>(dataset->data.n_interactions());
        return TR_OK;
    });
}

tr_status tr_ingest(const char* in_path, const char* out_path,
                    int min_user_interactions, int min_item_interactions,
                    int min_history_span_days) {
    return guarded([&]() -> tr_status {
        if (!in_path || !out_path) return fail(TR_ERR_INVALID, "null path");
        Dataset dataset = load_interactions(in_path);
        IngestOptions options;
        options.min_user_interactions = min_user_interactions;
        options.min_item_interactions = min_item_interactions;
        options.min_history_span_days = min_history_span_days;
        dataset = apply_filters(dataset, options);
        write_interactions(dataset, out_path);
        write_vocabulary(dataset.user_ids, std::string(out_path) + ".users.vocab");
        write_vocabulary(dataset.item_ids, std::string(out_path) + ".items.vocab");
        return TR_OK;
    });
}

void tr_synth_options_init(tr_synth_options* options) {
    if (!options) return;
    const SynthSpec defaults;
    options->users = defaults.users;
    options->items = defaults.items;
    options->interactions_per_user = defaults.interactions_per_user;
    options->items_per_user = defaults.items_per_user;
    options->plant_hour = defaults.plant_hour ? 1 : 0;
    options->plant_day_of_week = defaults.plant_day_of_week ? 1 : 0;
    options->jitter = defaults.jitter;
    options->start_time = defaults.start_time;
    options->span_days = defaults.span_days;
    options->seed = defaults.seed;
    options->trend_item = defaults.trend_item;
    options->trend_onset = defaults.trend_onset;
    options->trend_window = defaults.trend_window;
    options->trend_prob = defaults.trend_prob;
}

tr_status tr_synth(const tr_synth_options* options, const char* tsv_path,
                   const char* truth_path) {
    return guarded([&]() -> tr_status {
        if (!options || !tsv_path) return fail(TR_ERR_INVALID, "null argument");
        SynthSpec spec;
        spec.users = options->users;
        spec.items = options->items;
        spec.interactions_per_user = options->interactions_per_user;
        spec.items_per_user = options->items_per_user;
        spec.plant_hour = options->plant_hour != 0;
        spec.plant_day_of_week = options->plant_day_of_week != 0;
        spec.jitter = options->jitter;
        spec.start_time = options->start_time;
        spec.span_days = options->span_days;
        spec.seed = options->seed;
        spec.trend_item = options->trend_item;
        spec.trend_onset = options->trend_onset;
        spec.trend_window = options->trend_window;
        spec.trend_prob = options->trend_prob;
        synthesize(spec, tsv_path, truth_path ? truth_path : "");
        return TR_OK;
    });
}

void tr_train_options_init(tr_train_options* options) {
    if (!options) return;
    const TrainConfig defaults;
    options->dim = defaults.model.dim;
    options->batch_size = defaults.batch_size;
    options->history_len = defaults.model.history_len;
    options->radius_month = defaults.model.granularities.window_radius[0];
    options->radius_day_of_week = defaults.model.granularities.window_radius[1];
    options->radius_date = defaults.model.granularities.window_radius[2];
    options->radius_hour = defaults.model.granularities.window_radius[3];
    options->enable_month = 1;
    options->enable_day_of_week = 1;
    options->enable_date = 1;
    options->enable_hour = 1;
    options->learning_rate = defaults.learning_rate;
    options->dropout = defaults.model.dropout;
    options->mlp_width = 64;
    options->mlp_depth = 2;
    options->max_epochs = defaults.max_epochs;
    options->patience = defaults.patience;
    options->seed = defaults.seed;
    options->split_mode = 0;
    options->min_repeat = 3;
    options->utc_offset = 0;
    options->negative_separation = 3600;
    options->disable_mate = 0;
    options->history_encoding_at_target = 0;
}

namespace {

TrainConfig to_train_config(const tr_train_options& o) {
    TrainConfig cfg;
    cfg.model.dim = o.dim;
    cfg.model.granularities.enabled = {o.enable_month != 0, o.enable_day_of_week != 0,
                                       o.enable_date != 0, o.enable_hour != 0};
    cfg.model.granularities.window_radius = {o.radius_month, o.radius_day_of_week,
                                             o.radius_date, o.radius_hour};
    cfg.model.history_len = o.history_len;
    cfg.model.mlp_hidden.assign(static_cast<std::size_t>(std::max(o.mlp_depth, 0)),
                                o.mlp_width);
    cfg.model.dropout = o.dropout;
    cfg.model.utc_offset = o.utc_offset;
    cfg.model.history_encoding_at_target = o.history_encoding_at_target != 0;
    cfg.model.disable_mate = o.disable_mate != 0;
    cfg.learning_rate = o.learning_rate;
    cfg.batch_size = o.batch_size;
    cfg.max_epochs = o.max_epochs;
    cfg.patience = o.patience;
    cfg.seed = o.seed;
    cfg.negative_separation = o.negative_separation;
    return cfg;
}

}  // namespace

tr_status tr_train(const tr_dataset* dataset, const tr_train_options* options,
                   const char* checkpoint_path, const char* log_path) {
    return guarded([&]() -> tr_status {
        if (!dataset || !options || !checkpoint_path)
            return fail(TR_ERR_INVALID, "null argument");
        const TrainConfig cfg = to_train_config(*options);
        const SplitSpec spec =
            split(dataset->data, to_split_mode(options->split_mode), options->min_repeat);
        std::ofstream log;
        if (log_path) {
            log.open(log_path);
            if (!log) throw IoError(std::string("cannot open log file: ") + log_path);
        }
        TrainState state =
            train(dataset->data, spec, cfg, log_path ? &log : nullptr);
        state.best.save(checkpoint_path);
        return TR_OK;
    });
}

tr_status tr_model_load(const char* checkpoint_path, tr_model** out) {
    return guarded([&]() -> tr_status {
        if (!checkpoint_path || !out) return fail(TR_ERR_INVALID, "null argument");
        *out = new tr_model{Model::load(checkpoint_path)};
        return TR_OK;
    });
}

void tr_model_free(tr_model* model) { delete model; }

void tr_eval_options_init(tr_eval_options* options) {
    if (!options) return;
    options->scenario = 0;
    options->seed = 42;
    options->split_mode = 0;
    options->min_repeat = 3;
    options->negative_separation = 3600;
    options->use_validation = 0;
}

namespace {

void check_vocabulary(const Model& model, const Dataset& dataset) {
    if (model.n_users() != dataset.n_users())
        throw ContractError("checkpoint/dataset mismatch in user vocabulary: model has " +
                            std::to_string(model.n_users()) + " users, dataset has " +
                            std::to_string(dataset.n_users()));
    if (model.n_items() != dataset.n_items())
        throw ContractError("checkpoint/dataset mismatch in item vocabulary: model has " +
                            std::to_string(model.n_items()) + " items, dataset has " +
                            std::to_string(dataset.n_items()));
}

}  // namespace

tr_status tr_eval(const tr_model* model, const tr_dataset* dataset,
                  const tr_eval_options* options, char* buf, size_t buf_len) {
    return guarded([&]() -> tr_status {
        if (!model || !dataset || !options) return fail(TR_ERR_INVALID, "null argument");
        check_vocabulary(model->model, dataset->data);
        if (options->scenario != 0 && options->scenario != 1)
            return fail(TR_ERR_INVALID, "scenario must be 0 (item) or 1 (item-timing)");
        const SplitSpec spec =
            split(dataset->data, to_split_mode(options->split_mode), options->min_repeat);
        EvalOptions eval_options;
        eval_options.scenario =
            options->scenario == 0 ? Scenario::Item : Scenario::ItemTiming;
        eval_options.phase =
            options->use_validation ? EvalPhase::Validation : EvalPhase::Test;
        eval_options.seed = options->seed;
        eval_options.history_len = model->model.config().history_len;
        eval_options.separation = options->negative_separation;
        const MetricsReport report =
            evaluate(model->model, dataset->data, spec, eval_options);
        return copy_text(report.to_text(), buf, buf_len);
    });
}

tr_status tr_explain(const tr_model* model, const tr_dataset* dataset,
                     const char* user_id, const char* item_id, int64_t time,
                     int split_mode, int min_repeat, char* buf, size_t buf_len) {
    return guarded([&]() -> tr_status {
        if (!model || !dataset || !user_id || !item_id)
            return fail(TR_ERR_INVALID, "null argument");
        check_vocabulary(model->model, dataset->data);
        const SplitSpec spec =
            split(dataset->data, to_split_mode(split_mode), min_repeat);
        const std::string text =
            explain_text(model->model, dataset->data, user_id, item_id, time, spec);
        return copy_text(text, buf, buf_len);
    });
}

}  // extern "C"
