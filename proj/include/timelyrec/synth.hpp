#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "timelyrec/common.hpp"

namespace timelyrec {

// Planted-pattern generator: each user gets a preferred hour slot and/or
// day-of-week slot plus a small preferred item set; interactions land on
// the preferred slots up to +/- jitter. The generator itself is the ground
// truth for test assertions.
struct SynthSpec {
    int users = 200;
    int items = 100;
    int interactions_per_user = 30;
    int items_per_user = 5;
    bool plant_hour = true;
    bool plant_day_of_week = true;
    int jitter = 1;  // slots
    std::int64_t start_time = 1546300800;  // 2019-01-01 00:00:00 UTC
    int span_days = 360;
    std::uint64_t seed = 42;

    // Optional trend: within [onset, onset + decay window] every user picks
    // this item with probability trend_prob instead of a preferred item.
    int trend_item = -1;
    std::int64_t trend_onset = 0;
    std::int64_t trend_window = 0;
    double trend_prob = 0.5;

    void validate() const;
};

struct SynthUserTruth {
    int user;
    int preferred_hour;         // -1 when not planted
    int preferred_day_of_week;  // -1 when not planted
    std::vector<int> preferred_items;
};

struct SynthResult {
    std::vector<SynthUserTruth> truth;
};

// Writes the interaction TSV; with a non-empty truth path also writes a
// JSON sidecar recording each user's planted preferences.
SynthResult synthesize(const SynthSpec& spec, const std::string& tsv_path,
                       const std::string& truth_path = "");

}  // namespace timelyrec
