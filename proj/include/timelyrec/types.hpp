#pragma once

#include <cstdint>
#include <vector>

namespace timelyrec {

// One (user, item, timestamp) event with dense ids.
struct Interaction {
    int user;
    int item;
    std::int64_t time;
};

struct HistoryEntry {
    int item;
    std::int64_t time;
};

// Up to l recent interactions, most-recent-first, all strictly before the
// target time.
using HistoryWindow = std::vector<HistoryEntry>;

// One labeled training or evaluation example.
struct Example {
    int user;
    int item;
    std::int64_t time;
    double label;
    HistoryWindow history;
};

}  // namespace timelyrec
