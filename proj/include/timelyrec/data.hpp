#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "timelyrec/common.hpp"
#include "timelyrec/types.hpp"

namespace timelyrec {

// Immutable after load; freely shared across threads.
struct Dataset {
    struct Event {
        int item;
        std::int64_t time;
    };

    std::vector<std::string> user_ids;  // dense id -> external id
    std::vector<std::string> item_ids;
    std::unordered_map<std::string, int> user_index;
    std::unordered_map<std::string, int> item_index;

    // Per-user events sorted by timestamp; ties keep input order (stable).
    std::vector<std::vector<Event>> events;
    std::vector<std::unordered_set<int>> consumed;
    // Per user: item -> sorted interaction timestamps, for the negative
    // timestamp separation rule.
    std::vector<std::unordered_map<int, std::vector<std::int64_t>>> item_times;

    int n_users() const { return static_cast<int>(user_ids.size()); }
    int n_items() const { return static_cast<int>(item_ids.size()); }
    std::size_t n_interactions() const;

    int user_id(const std::string& external) const;
    int item_id(const std::string& external) const;
};

// TSV, one record per line: user_id<TAB>item_id<TAB>timestamp_seconds.
// Vocabularies are assigned densely in first-appearance order; duplicate
// (u, i, t) triples are kept.
Dataset load_interactions(const std::string& path);

// Re-serialize grouped per user in vocabulary order, each user's events in
// chronological order. Idempotent under reload.
void write_interactions(const Dataset& dataset, const std::string& path);

// One external id per line, line number = dense id.
void write_vocabulary(const std::vector<std::string>& ids, const std::string& path);

struct IngestOptions {
    int min_user_interactions = 0;
    int min_item_interactions = 0;
    int min_history_span_days = 0;
};

// Item-count filter first, then per-user count and history-span filters.
Dataset apply_filters(const Dataset& dataset, const IngestOptions& options);

enum class SplitMode { Standard, RepeatAware };

struct UserSplit {
    bool evaluable = false;
    std::size_t test_pos = 0;
    std::size_t val_pos = 0;
    // Training events are the positions in [0, train_end).
    std::size_t train_end = 0;
};

struct SplitSpec {
    SplitMode mode = SplitMode::Standard;
    std::vector<UserSplit> users;
    int dropped_users = 0;
};

// Standard: test = last, validation = second last, train = rest (users with
// fewer than 3 interactions are dropped from evaluation, training retained).
// Repeat-aware: among each user's first interactions with items the user
// consumed at least `min_repeat` times, test = latest, validation = second
// latest; interactions after the validation sample are excluded from
// training.
SplitSpec split(const Dataset& dataset, SplitMode mode, int min_repeat = 3);

// The l latest events of `user` with position < position_limit and
// timestamp strictly < time, most-recent-first.
HistoryWindow recent_history(const Dataset& dataset, int user, std::int64_t time,
                             int l, std::size_t position_limit);

// Training-visible history for a user under a split.
HistoryWindow recent_history(const Dataset& dataset, const SplitSpec& split, int user,
                             std::int64_t time, int l);

// Uniform over the item vocabulary minus the user's consumed set.
int sample_negative_item(const Dataset& dataset, int user, Rng& rng);

enum class NegativeTimePurpose { Train, Eval };

inline constexpr std::int64_t kEvalWindowSeconds = 15552000;  // 180 days
inline constexpr int kMaxSampleRejections = 1000;

// Eval purpose: uniform over [t_pos - 180 days, t_pos), at least
// `separation` seconds from every (user, item) interaction time and from
// every timestamp in `accepted`. Train purpose: uniform over the user's
// [first, last] interaction span with the same (user, item) separation.
std::int64_t sample_negative_timestamp(const Dataset& dataset, int user, int item,
                                       std::int64_t t_pos, NegativeTimePurpose purpose,
                                       Rng& rng,
                                       const std::vector<std::int64_t>& accepted,
                                       std::int64_t separation = 3600);

struct EpochOptions {
    int history_len = 5;
    std::int64_t separation = 3600;
    std::uint64_t seed = 42;
};

// For every training positive: the positive plus three fresh negatives
// (wrong item, wrong time, wrong both), each with a history window at its
// own timestamp. Draws derive from (seed, epoch, positive index).
std::vector<Example> build_training_epoch(const Dataset& dataset, const SplitSpec& split,
                                          const EpochOptions& options, int epoch,
                                          int* skipped = nullptr);

}  // namespace timelyrec
