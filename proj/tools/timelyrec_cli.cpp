// Command-line front end; links only the C API.
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "timelyrec/timelyrec.h"

namespace {

bool verbose() {
    const char* v = std::getenv("TIMELYREC_VERBOSE");
    return v && *v && std::string(v) != "0";
}

int exit_code(tr_status status) {
    switch (status) {
        case TR_OK: return 0;
        case TR_ERR_INVALID:
        case TR_ERR_IO: return 2;
        case TR_ERR_NUMERIC: return 3;
        case TR_ERR_INFEASIBLE: return 4;
        default: return 1;
    }
}

int finish(tr_status status) {
    if (status != TR_OK) std::fprintf(stderr, "error: %s\n", tr_last_error());
    return exit_code(status);
}

int parse_split(const std::string& name) {
    if (name == "standard") return 0;
    if (name == "repeat-aware") return 1;
    std::fprintf(stderr, "error: unknown split mode '%s'\n", name.c_str());
    std::exit(2);
}

struct DatasetGuard {
    tr_dataset* handle = nullptr;
    ~DatasetGuard() { tr_dataset_free(handle); }
};

struct ModelGuard {
    tr_model* handle = nullptr;
    ~ModelGuard() { tr_model_free(handle); }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TimelyRec: time-aware recommendation training and evaluation"};
    app.require_subcommand(1);

    // ---- ingest ----
    auto* ingest = app.add_subcommand("ingest", "Filter and normalize an interaction TSV");
    std::string in_path, out_path;
    int min_user = 0, min_item = 0, min_span = 0;
    ingest->add_option("--input", in_path, "Input interaction TSV")->required();
    ingest->add_option("--output", out_path, "Output dataset TSV")->required();
    ingest->add_option("--min-user-interactions", min_user,
                       "Drop users with fewer interactions")->capture_default_str();
    ingest->add_option("--min-item-interactions", min_item,
                       "Drop items with fewer interactions")->capture_default_str();
    ingest->add_option("--min-history-span-days", min_span,
                       "Drop users whose history spans fewer days")->capture_default_str();

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "Generate a planted-pattern dataset");
    tr_synth_options so;
    tr_synth_options_init(&so);
    std::string synth_out, synth_truth;
    bool no_hour = false, no_dow = false;
    synth->add_option("--output", synth_out, "Output interaction TSV")->required();
    synth->add_option("--truth", synth_truth, "Ground-truth sidecar JSON");
    synth->add_option("--users", so.users, "User count")->capture_default_str();
    synth->add_option("--items", so.items, "Item count")->capture_default_str();
    synth->add_option("--interactions-per-user", so.interactions_per_user,
                      "Interactions per user")->capture_default_str();
    synth->add_option("--items-per-user", so.items_per_user,
                      "Preferred item set size")->capture_default_str();
    synth->add_flag("--no-hour-preference", no_hour, "Do not plant an hour preference");
    synth->add_flag("--no-dow-preference", no_dow,
                    "Do not plant a day-of-week preference");
    synth->add_option("--jitter", so.jitter, "Slot jitter radius")->capture_default_str();
    synth->add_option("--start-time", so.start_time,
                      "Epoch seconds of the generation window start")->capture_default_str();
    synth->add_option("--span-days", so.span_days, "Generation window length")
        ->capture_default_str();
    synth->add_option("--seed", so.seed, "RNG seed")->capture_default_str();
    synth->add_option("--trend-item", so.trend_item,
                      "Item index boosted during the trend window (-1 disables)")
        ->capture_default_str();
    synth->add_option("--trend-onset", so.trend_onset, "Trend onset epoch seconds")
        ->capture_default_str();
    synth->add_option("--trend-window", so.trend_window, "Trend window seconds")
        ->capture_default_str();
    synth->add_option("--trend-prob", so.trend_prob,
                      "Probability of picking the trend item inside the window")
        ->capture_default_str();

    // ---- train ----
    auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
    tr_train_options to;
    tr_train_options_init(&to);
    std::string train_data, train_ckpt, train_log, train_split = "standard";
    std::vector<std::string> disable_granularities;
    train->add_option("--data", train_data, "Dataset TSV")->required();
    train->add_option("--checkpoint", train_ckpt, "Output checkpoint path")->required();
    train->add_option("--log", train_log, "Per-epoch training log path");
    train->add_option("--dim", to.dim, "Embedding size")->capture_default_str();
    train->add_option("--batch-size", to.batch_size, "Batch size")->capture_default_str();
    train->add_option("--history-len", to.history_len, "Recent-interaction window length")
        ->capture_default_str();
    train->add_option("--radius-month", to.radius_month, "Gradual-attention radius, month")
        ->capture_default_str();
    train->add_option("--radius-dow", to.radius_day_of_week,
                      "Gradual-attention radius, day of week")->capture_default_str();
    train->add_option("--radius-date", to.radius_date, "Gradual-attention radius, date")
        ->capture_default_str();
    train->add_option("--radius-hour", to.radius_hour, "Gradual-attention radius, hour")
        ->capture_default_str();
    train->add_option("--disable-granularity", disable_granularities,
                      "Disable a granularity (month|dow|date|hour); repeatable");
    train->add_option("--learning-rate", to.learning_rate, "Adam learning rate")
        ->capture_default_str();
    train->add_option("--dropout", to.dropout, "Dropout rate for hidden layers")
        ->capture_default_str();
    train->add_option("--mlp-width", to.mlp_width, "Hidden layer width")
        ->capture_default_str();
    train->add_option("--mlp-depth", to.mlp_depth, "Hidden layer count")
        ->capture_default_str();
    train->add_option("--max-epochs", to.max_epochs, "Epoch budget")->capture_default_str();
    train->add_option("--patience", to.patience,
                      "Epochs without validation HR@10 improvement before stopping")
        ->capture_default_str();
    train->add_option("--seed", to.seed, "RNG seed")->capture_default_str();
    train->add_option("--split", train_split, "Split mode: standard or repeat-aware")
        ->capture_default_str();
    train->add_option("--min-repeat", to.min_repeat,
                      "Repeat-aware split: minimum per-item consumption count")
        ->capture_default_str();
    train->add_option("--utc-offset", to.utc_offset, "Fixed timezone offset in seconds")
        ->capture_default_str();
    train->add_option("--neg-separation", to.negative_separation,
                      "Minimum negative-timestamp separation in seconds")
        ->capture_default_str();
    bool disable_mate = false, hist_te_target = false;
    train->add_flag("--disable-mate", disable_mate,
                    "Ablation: zero the timestamp representation");
    train->add_flag("--history-encoding-at-target", hist_te_target,
                    "Encode history items at the target time instead of their own");

    // ---- eval ----
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
    tr_eval_options eo;
    tr_eval_options_init(&eo);
    std::string eval_data, eval_ckpt, eval_scenario = "item", eval_split = "standard";
    bool use_validation = false;
    eval->add_option("--checkpoint", eval_ckpt, "Model checkpoint")->required();
    eval->add_option("--data", eval_data, "Dataset TSV")->required();
    eval->add_option("--scenario", eval_scenario, "item or item-timing")
        ->capture_default_str();
    eval->add_option("--seed", eo.seed, "RNG seed")->capture_default_str();
    eval->add_option("--split", eval_split, "Split mode: standard or repeat-aware")
        ->capture_default_str();
    eval->add_option("--min-repeat", eo.min_repeat,
                     "Repeat-aware split: minimum per-item consumption count")
        ->capture_default_str();
    eval->add_option("--neg-separation", eo.negative_separation,
                     "Minimum negative-timestamp separation in seconds")
        ->capture_default_str();
    eval->add_flag("--validation", use_validation,
                   "Evaluate validation positives instead of test positives");

    // ---- explain ----
    auto* explain = app.add_subcommand("explain", "Print attention scores for a triple");
    std::string ex_data, ex_ckpt, ex_user, ex_item, ex_split = "standard";
    std::int64_t ex_time = 0;
    int ex_min_repeat = 3;
    explain->add_option("--checkpoint", ex_ckpt, "Model checkpoint")->required();
    explain->add_option("--data", ex_data, "Dataset TSV")->required();
    explain->add_option("--user", ex_user, "External user id")->required();
    explain->add_option("--item", ex_item, "External item id")->required();
    explain->add_option("--time", ex_time, "Target time, epoch seconds")->required();
    explain->add_option("--split", ex_split, "Split mode: standard or repeat-aware")
        ->capture_default_str();
    explain->add_option("--min-repeat", ex_min_repeat,
                        "Repeat-aware split: minimum per-item consumption count")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    if (ingest->parsed()) {
        if (verbose()) std::fprintf(stderr, "ingesting %s\n", in_path.c_str());
        return finish(tr_ingest(in_path.c_str(), out_path.c_str(), min_user, min_item,
                                min_span));
    }

    if (synth->parsed()) {
        so.plant_hour = no_hour ? 0 : 1;
        so.plant_day_of_week = no_dow ? 0 : 1;
        return finish(tr_synth(&so, synth_out.c_str(),
                               synth_truth.empty() ? nullptr : synth_truth.c_str()));
    }

    if (train->parsed()) {
        to.split_mode = parse_split(train_split);
        to.disable_mate = disable_mate ? 1 : 0;
        to.history_encoding_at_target = hist_te_target ? 1 : 0;
        for (const std::string& g : disable_granularities) {
            if (g == "month") to.enable_month = 0;
            else if (g == "dow") to.enable_day_of_week = 0;
            else if (g == "date") to.enable_date = 0;
            else if (g == "hour") to.enable_hour = 0;
            else {
                std::fprintf(stderr, "error: unknown granularity '%s'\n", g.c_str());
                return 2;
            }
        }
        DatasetGuard dataset;
        tr_status status = tr_dataset_load(train_data.c_str(), &dataset.handle);
        if (status != TR_OK) return finish(status);
        if (verbose()) std::fprintf(stderr, "training on %s\n", train_data.c_str());
        return finish(tr_train(dataset.handle, &to, train_ckpt.c_str(),
                               train_log.empty() ? nullptr : train_log.c_str()));
    }

    if (eval->parsed()) {
        if (eval_scenario == "item") eo.scenario = 0;
        else if (eval_scenario == "item-timing") eo.scenario = 1;
        else {
            std::fprintf(stderr, "error: unknown scenario '%s'\n", eval_scenario.c_str());
            return 2;
        }
        eo.split_mode = parse_split(eval_split);
        eo.use_validation = use_validation ? 1 : 0;
        DatasetGuard dataset;
        ModelGuard model;
        tr_status status = tr_dataset_load(eval_data.c_str(), &dataset.handle);
        if (status != TR_OK) return finish(status);
        status = tr_model_load(eval_ckpt.c_str(), &model.handle);
        if (status != TR_OK) return finish(status);
        std::vector<char> buf(1 << 16);
        status = tr_eval(model.handle, dataset.handle, &eo, buf.data(), buf.size());
        if (status != TR_OK) return finish(status);
        std::fputs(buf.data(), stdout);
        return 0;
    }

    if (explain->parsed()) {
        DatasetGuard dataset;
        ModelGuard model;
        tr_status status = tr_dataset_load(ex_data.c_str(), &dataset.handle);
        if (status != TR_OK) return finish(status);
        status = tr_model_load(ex_ckpt.c_str(), &model.handle);
        if (status != TR_OK) return finish(status);
        std::vector<char> buf(1 << 16);
        status = tr_explain(model.handle, dataset.handle, ex_user.c_str(),
                            ex_item.c_str(), ex_time, parse_split(ex_split),
                            ex_min_repeat, buf.data(), buf.size());
        if (status != TR_OK) return finish(status);
        std::fputs(buf.data(), stdout);
        return 0;
    }

    return 2;
}
