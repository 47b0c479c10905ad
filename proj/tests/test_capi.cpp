#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <string>

#include "timelyrec/timelyrec.h"

namespace {

struct TempPath {
    std::string path;
    explicit TempPath(const std::string& name) : path("tmp_capi_" + name) {}
    ~TempPath() { std::remove(path.c_str()); }
    const char* c_str() const { return path.c_str(); }
};

struct DatasetGuard {
    tr_dataset* ptr = nullptr;
    ~DatasetGuard() { tr_dataset_free(ptr); }
};

struct ModelGuard {
    tr_model* ptr = nullptr;
    ~ModelGuard() { tr_model_free(ptr); }
};

tr_synth_options small_synth() {
    tr_synth_options s;
    tr_synth_options_init(&s);
    s.users = 25;
    s.items = 30;
    s.interactions_per_user = 8;
    s.items_per_user = 4;
    s.seed = 7;
    return s;
}

tr_train_options tiny_train() {
    tr_train_options t;
    tr_train_options_init(&t);
    t.dim = 4;
    t.history_len = 2;
    t.radius_month = 1;
    t.radius_day_of_week = 1;
    t.radius_date = 1;
    t.radius_hour = 1;
    t.mlp_width = 4;
    t.mlp_depth = 1;
    t.max_epochs = 1;
    t.seed = 3;
    return t;
}

}  // namespace

TEST_CASE("option initializers fill in the documented defaults") {
    tr_synth_options s;
    tr_synth_options_init(&s);
    CHECK(s.users == 200);
    CHECK(s.items == 100);
    CHECK(s.jitter == 1);
    CHECK(s.trend_item == -1);

    tr_train_options t;
    tr_train_options_init(&t);
    CHECK(t.dim == 32);
    CHECK(t.learning_rate == 0.001);
    CHECK(t.radius_month == 2);
    CHECK(t.radius_day_of_week == 1);
    CHECK(t.radius_date == 6);
    CHECK(t.radius_hour == 5);
    CHECK(t.enable_month == 1);
    CHECK(t.disable_mate == 0);
    CHECK(t.negative_separation == 3600);

    tr_eval_options e;
    tr_eval_options_init(&e);
    CHECK(e.scenario == 0);
    CHECK(e.use_validation == 0);
}

TEST_CASE("full pipeline: synth, ingest, train, eval, explain") {
    TempPath tsv("pipe.tsv");
    const tr_synth_options synth = small_synth();
    REQUIRE(tr_synth(&synth, tsv.c_str(), nullptr) == TR_OK);

    DatasetGuard data;
    REQUIRE(tr_dataset_load(tsv.c_str(), &data.ptr) == TR_OK);
    int64_t users = 0, items = 0, interactions = 0;
    REQUIRE(tr_dataset_counts(data.ptr, &users, &items, &interactions) == TR_OK);
    CHECK(users == 25);
    CHECK(items <= 30);
    CHECK(interactions == 25 * 8);

    TempPath filtered("pipe_filtered.tsv");
    TempPath uvocab("pipe_filtered.tsv.users.vocab");
    TempPath ivocab("pipe_filtered.tsv.items.vocab");
    REQUIRE(tr_ingest(tsv.c_str(), filtered.c_str(), 3, 1, 0) == TR_OK);
    DatasetGuard refiltered;
    REQUIRE(tr_dataset_load(filtered.c_str(), &refiltered.ptr) == TR_OK);
    int64_t fu = 0, fi = 0, fn = 0;
    REQUIRE(tr_dataset_counts(refiltered.ptr, &fu, &fi, &fn) == TR_OK);
    CHECK(fu == 25);  // every synthetic user has eight interactions
    CHECK(fn == interactions);

    TempPath ckpt("pipe_ckpt.bin");
    TempPath log("pipe_train.log");
    const tr_train_options train = tiny_train();
    REQUIRE(tr_train(data.ptr, &train, ckpt.c_str(), log.c_str()) == TR_OK);

    ModelGuard model;
    REQUIRE(tr_model_load(ckpt.c_str(), &model.ptr) == TR_OK);

    tr_eval_options eval;
    tr_eval_options_init(&eval);
    char buf_a[4096], buf_b[4096];
    REQUIRE(tr_eval(model.ptr, data.ptr, &eval, buf_a, sizeof buf_a) == TR_OK);
    REQUIRE(tr_eval(model.ptr, data.ptr, &eval, buf_b, sizeof buf_b) == TR_OK);
    CHECK(std::strcmp(buf_a, buf_b) == 0);
    CHECK(std::strstr(buf_a, "scenario=item\n") != nullptr);
    CHECK(std::strstr(buf_a, "hr@10=") != nullptr);

    eval.scenario = 1;
    char buf_t[4096];
    REQUIRE(tr_eval(model.ptr, data.ptr, &eval, buf_t, sizeof buf_t) == TR_OK);
    CHECK(std::strstr(buf_t, "scenario=item-timing\n") != nullptr);

    char report[16384];
    REQUIRE(tr_explain(model.ptr, data.ptr, "u0", "i0", 1577836800, 0, 3, report,
                       sizeof report) == TR_OK);
    CHECK(std::strstr(report, "user=u0") != nullptr);
    CHECK(std::strstr(report, "importance=") != nullptr);
    CHECK(std::strstr(report, "score=") != nullptr);
}

TEST_CASE("training on one dataset rejects evaluation against another") {
    TempPath tsv_a("mismatch_a.tsv"), tsv_b("mismatch_b.tsv");
    tr_synth_options synth = small_synth();
    REQUIRE(tr_synth(&synth, tsv_a.c_str(), nullptr) == TR_OK);
    synth.users = 12;  // different vocabulary sizes
    synth.items = 9;
    REQUIRE(tr_synth(&synth, tsv_b.c_str(), nullptr) == TR_OK);

    DatasetGuard a, b;
    REQUIRE(tr_dataset_load(tsv_a.c_str(), &a.ptr) == TR_OK);
    REQUIRE(tr_dataset_load(tsv_b.c_str(), &b.ptr) == TR_OK);

    TempPath ckpt("mismatch_ckpt.bin");
    const tr_train_options train = tiny_train();
    REQUIRE(tr_train(a.ptr, &train, ckpt.c_str(), nullptr) == TR_OK);
    ModelGuard model;
    REQUIRE(tr_model_load(ckpt.c_str(), &model.ptr) == TR_OK);

    tr_eval_options eval;
    tr_eval_options_init(&eval);
    char buf[4096];
    CHECK(tr_eval(model.ptr, b.ptr, &eval, buf, sizeof buf) == TR_ERR_INVALID);
    CHECK(std::strlen(tr_last_error()) > 0);
}

TEST_CASE("error paths report the right status codes") {
    CHECK(tr_dataset_load(nullptr, nullptr) == TR_ERR_INVALID);
    DatasetGuard missing;
    CHECK(tr_dataset_load("no_such_file.tsv", &missing.ptr) == TR_ERR_IO);
    CHECK(std::strlen(tr_last_error()) > 0);

    ModelGuard bad;
    CHECK(tr_model_load("no_such_ckpt.bin", &bad.ptr) == TR_ERR_IO);
    CHECK(tr_model_load(nullptr, &bad.ptr) == TR_ERR_INVALID);

    CHECK(tr_synth(nullptr, "x.tsv", nullptr) == TR_ERR_INVALID);
    tr_synth_options synth = small_synth();
    synth.users = 0;
    CHECK(tr_synth(&synth, "x.tsv", nullptr) == TR_ERR_INVALID);

    CHECK(tr_ingest(nullptr, "y.tsv", 0, 0, 0) == TR_ERR_INVALID);
    CHECK(tr_ingest("no_such_file.tsv", "y.tsv", 0, 0, 0) == TR_ERR_IO);
}

TEST_CASE("a too-small buffer returns a buffer error naming the needed size") {
    TempPath tsv("buffer.tsv");
    const tr_synth_options synth = small_synth();
    REQUIRE(tr_synth(&synth, tsv.c_str(), nullptr) == TR_OK);
    DatasetGuard data;
    REQUIRE(tr_dataset_load(tsv.c_str(), &data.ptr) == TR_OK);

    TempPath ckpt("buffer_ckpt.bin");
    const tr_train_options train = tiny_train();
    REQUIRE(tr_train(data.ptr, &train, ckpt.c_str(), nullptr) == TR_OK);
    ModelGuard model;
    REQUIRE(tr_model_load(ckpt.c_str(), &model.ptr) == TR_OK);

    tr_eval_options eval;
    tr_eval_options_init(&eval);
    char tiny[8];
    CHECK(tr_eval(model.ptr, data.ptr, &eval, tiny, sizeof tiny) == TR_ERR_BUFFER);
    CHECK(std::strlen(tr_last_error()) > 0);
}

TEST_CASE("invalid enum values are rejected") {
    TempPath tsv("enums.tsv");
    const tr_synth_options synth = small_synth();
    REQUIRE(tr_synth(&synth, tsv.c_str(), nullptr) == TR_OK);
    DatasetGuard data;
    REQUIRE(tr_dataset_load(tsv.c_str(), &data.ptr) == TR_OK);

    TempPath ckpt("enums_ckpt.bin");
    const tr_train_options train = tiny_train();
    REQUIRE(tr_train(data.ptr, &train, ckpt.c_str(), nullptr) == TR_OK);
    ModelGuard model;
    REQUIRE(tr_model_load(ckpt.c_str(), &model.ptr) == TR_OK);

    tr_eval_options eval;
    tr_eval_options_init(&eval);
    eval.scenario = 7;
    char buf[4096];
    CHECK(tr_eval(model.ptr, data.ptr, &eval, buf, sizeof buf) == TR_ERR_INVALID);
    tr_eval_options_init(&eval);
    eval.split_mode = 5;
    CHECK(tr_eval(model.ptr, data.ptr, &eval, buf, sizeof buf) == TR_ERR_INVALID);

    char report[4096];
    CHECK(tr_explain(model.ptr, data.ptr, "nobody", "i0", 1577836800, 0, 3, report,
                     sizeof report) == TR_ERR_INVALID);
}
