#include "timelyrec/data.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

namespace timelyrec {

std::size_t Dataset::n_interactions() const {
    std::size_t n = 0;
    for (const auto& seq : events) n += seq.size();
    return n;
}

int Dataset::user_id(const std::string& external) const {
    auto it = user_index.find(external);
    if (it == user_index.end())
        throw ContractError("unknown id in user vocabulary: " + external);
    return it->second;
}

int Dataset::item_id(const std::string& external) const {
    auto it = item_index.find(external);
    if (it == item_index.end())
        throw ContractError("unknown id in item vocabulary: " + external);
    return it->second;
}

namespace {

int intern(std::unordered_map<std::string, int>& index, std::vector<std::string>& ids,
           const std::string& external) {
    auto it = index.find(external);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(ids.size());
    ids.push_back(external);
    index.emplace(external, id);
    return id;
}

void finalize(Dataset& d) {
    for (auto& seq : d.events)
        std::stable_sort(seq.begin(), seq.end(),
                         [](const Dataset::Event& a, const Dataset::Event& b) {
                             return a.time < b.time;
                         });
    d.consumed.assign(d.events.size(), {});
    d.item_times.assign(d.events.size(), {});
    for (std::size_t u = 0; u < d.events.size(); ++u) {
        for (const Dataset::Event& e : d.events[u]) {
            d.consumed[u].insert(e.item);
            d.item_times[u][e.item].push_back(e.time);
        }
    }
}

bool parse_timestamp(const std::string& s, std::int64_t& out) {
    if (s.empty() || s.size() > 18) return false;
    std::int64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

}  // namespace

Dataset load_interactions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open interaction file: " + path);
    Dataset d;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::size_t tab1 = line.find('\t');
        const std::size_t tab2 =
            tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos ||
            line.find('\t', tab2 + 1) != std::string::npos)
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": expected 3 tab-separated fields");
        const std::string user = line.substr(0, tab1);
        const std::string item = line.substr(tab1 + 1, tab2 - tab1 - 1);
        std::int64_t t;
        if (user.empty() || item.empty() || !parse_timestamp(line.substr(tab2 + 1), t))
            throw IoError(path + ":" + std::to_string(line_no) + ": malformed record");
        const int u = intern(d.user_index, d.user_ids, user);
        intern(d.item_index, d.item_ids, item);
        if (static_cast<std::size_t>(u) >= d.events.size()) d.events.resize(u + 1);
        d.events[static_cast<std::size_t>(u)].push_back(
            {d.item_index.at(item), t});
    }
    d.events.resize(d.user_ids.size());
    finalize(d);
    return d;
}

void write_interactions(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open output file: " + path);
    for (int u = 0; u < dataset.n_users(); ++u)
        for (const Dataset::Event& e : dataset.events[static_cast<std::size_t>(u)])
            out << dataset.user_ids[static_cast<std::size_t>(u)] << '\t'
                << dataset.item_ids[static_cast<std::size_t>(e.item)] << '\t' << e.time
                << '\n';
    if (!out) throw IoError("write failed: " + path);
}

void write_vocabulary(const std::vector<std::string>& ids, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open vocabulary file: " + path);
    for (const std::string& id : ids) out << id << '\n';
    if (!out) throw IoError("write failed: " + path);
}

Dataset apply_filters(const Dataset& dataset, const IngestOptions& options) {
    std::vector<std::size_t> item_counts(static_cast<std::size_t>(dataset.n_items()), 0);
    for (const auto& seq : dataset.events)
        for (const Dataset::Event& e : seq)
            ++item_counts[static_cast<std::size_t>(e.item)];

    Dataset out;
    const std::int64_t min_span =
        static_cast<std::int64_t>(options.min_history_span_days) * 86400;
    for (int u = 0; u < dataset.n_users(); ++u) {
        std::vector<Dataset::Event> kept;
        for (const Dataset::Event& e : dataset.events[static_cast<std::size_t>(u)])
            if (static_cast<int>(item_counts[static_cast<std::size_t>(e.item)]) >=
                options.min_item_interactions)
                kept.push_back(e);
        if (static_cast<int>(kept.size()) < options.min_user_interactions) continue;
        if (kept.empty()) continue;
        if (kept.back().time - kept.front().time < min_span) continue;
        const int nu =
            intern(out.user_index, out.user_ids, dataset.user_ids[static_cast<std::size_t>(u)]);
        out.events.resize(static_cast<std::size_t>(nu) + 1);
        for (const Dataset::Event& e : kept) {
            const int ni = intern(out.item_index, out.item_ids,
                                  dataset.item_ids[static_cast<std::size_t>(e.item)]);
            out.events[static_cast<std::size_t>(nu)].push_back({ni, e.time});
        }
    }
    finalize(out);
    return out;
}

SplitSpec split(const Dataset& dataset, SplitMode mode, int min_repeat) {
    SplitSpec spec;
    spec.mode = mode;
    spec.users.resize(static_cast<std::size_t>(dataset.n_users()));
    for (int u = 0; u < dataset.n_users(); ++u) {
        const auto& seq = dataset.events[static_cast<std::size_t>(u)];
        UserSplit& us = spec.users[static_cast<std::size_t>(u)];
        us.train_end = seq.size();
        if (mode == SplitMode::Standard) {
            if (seq.size() < 3) {
                ++spec.dropped_users;
                continue;
            }
            us.evaluable = true;
            us.test_pos = seq.size() - 1;
            us.val_pos = seq.size() - 2;
            us.train_end = seq.size() - 2;
        } else {
            std::unordered_map<int, int> counts;
            for (const Dataset::Event& e : seq) ++counts[e.item];
            std::unordered_set<int> seen;
            std::vector<std::size_t> qualifying_firsts;
            for (std::size_t p = 0; p < seq.size(); ++p) {
                if (!seen.insert(seq[p].item).second) continue;
                if (counts[seq[p].item] >= min_repeat) qualifying_firsts.push_back(p);
            }
            if (qualifying_firsts.size() < 2) {
                ++spec.dropped_users;
                continue;
            }
            us.evaluable = true;
            us.test_pos = qualifying_firsts[qualifying_firsts.size() - 1];
            us.val_pos = qualifying_firsts[qualifying_firsts.size() - 2];
            us.train_end = us.val_pos;
        }
    }
    return spec;
}

HistoryWindow recent_history(const Dataset& dataset, int user, std::int64_t time, int l,
                             std::size_t position_limit) {
    const auto& seq = dataset.events[static_cast<std::size_t>(user)];
    const std::size_t limit = std::min(position_limit, seq.size());
    HistoryWindow window;
    for (std::size_t p = limit; p-- > 0 && static_cast<int>(window.size()) < l;)
        if (seq[p].time < time) window.push_back({seq[p].item, seq[p].time});
    return window;
}

HistoryWindow recent_history(const Dataset& dataset, const SplitSpec& split, int user,
                             std::int64_t time, int l) {
    return recent_history(dataset, user, time, l,
                          split.users[static_cast<std::size_t>(user)].train_end);
}

int sample_negative_item(const Dataset& dataset, int user, Rng& rng) {
    const auto& consumed = dataset.consumed[static_cast<std::size_t>(user)];
    const std::size_t candidates =
        static_cast<std::size_t>(dataset.n_items()) - consumed.size();
    if (candidates == 0)
        throw InfeasibleError("user consumed every item: " +
                              dataset.user_ids[static_cast<std::size_t>(user)]);
    if (consumed.size() * 2 < static_cast<std::size_t>(dataset.n_items())) {
        for (;;) {
            const int item = static_cast<int>(
                rng.next_below(static_cast<std::uint64_t>(dataset.n_items())));
            if (!consumed.count(item)) return item;
        }
    }
    // Consumed set is dense; index directly into the complement.
    std::uint64_t k = rng.next_below(candidates);
    for (int item = 0; item < dataset.n_items(); ++item) {
        if (consumed.count(item)) continue;
        if (k == 0) return item;
        --k;
    }
    throw InfeasibleError("negative item enumeration exhausted");
}

namespace {

bool separated(const std::vector<std::int64_t>& sorted_times, std::int64_t candidate,
               std::int64_t separation) {
    auto it = std::lower_bound(sorted_times.begin(), sorted_times.end(), candidate);
    if (it != sorted_times.end() && *it - candidate < separation) return false;
    if (it != sorted_times.begin() && candidate - *(it - 1) < separation) return false;
    return true;
}

}  // namespace

std::int64_t sample_negative_timestamp(const Dataset& dataset, int user, int item,
                                       std::int64_t t_pos, NegativeTimePurpose purpose,
                                       Rng& rng,
                                       const std::vector<std::int64_t>& accepted,
                                       std::int64_t separation) {
    std::int64_t lo, hi;
    if (purpose == NegativeTimePurpose::Eval) {
        lo = std::max<std::int64_t>(0, t_pos - kEvalWindowSeconds);
        hi = t_pos - 1;
    } else {
        const auto& seq = dataset.events[static_cast<std::size_t>(user)];
        if (seq.empty())
            throw InfeasibleError("user has no interactions: " +
                                  dataset.user_ids[static_cast<std::size_t>(user)]);
        lo = seq.front().time;
        hi = seq.back().time;
    }
    if (lo > hi)
        throw InfeasibleError("empty negative-timestamp window for user " +
                              dataset.user_ids[static_cast<std::size_t>(user)]);

    const auto& times_by_item = dataset.item_times[static_cast<std::size_t>(user)];
    const auto it = times_by_item.find(item);
    static const std::vector<std::int64_t> kNoTimes;
    const std::vector<std::int64_t>& positive_times =
        it != times_by_item.end() ? it->second : kNoTimes;

    for (int attempt = 0; attempt < kMaxSampleRejections; ++attempt) {
        const std::int64_t candidate = rng.next_in(lo, hi);
        if (!separated(positive_times, candidate, separation)) continue;
        if (purpose == NegativeTimePurpose::Eval) {
            bool clash = std::abs(candidate - t_pos) < separation;
            for (std::int64_t a : accepted)
                if (std::abs(candidate - a) < separation) {
                    clash = true;
                    break;
                }
            if (clash) continue;
        }
        return candidate;
    }
    throw InfeasibleError(
        "negative timestamp sampling infeasible for (user, item) = (" +
        dataset.user_ids[static_cast<std::size_t>(user)] + ", " +
        dataset.item_ids[static_cast<std::size_t>(item)] + ")");
}

std::vector<Example> build_training_epoch(const Dataset& dataset, const SplitSpec& split,
                                          const EpochOptions& options, int epoch,
                                          int* skipped) {
    std::vector<Example> out;
    int skip_count = 0;
    std::uint64_t positive_index = 0;
    for (int u = 0; u < dataset.n_users(); ++u) {
        const auto& seq = dataset.events[static_cast<std::size_t>(u)];
        const std::size_t train_end = split.users[static_cast<std::size_t>(u)].train_end;
        for (std::size_t p = 0; p < train_end; ++p, ++positive_index) {
            const Dataset::Event& pos = seq[p];
            Rng rng{options.seed, 0xE0C0FFEEull, static_cast<std::uint64_t>(epoch),
                    positive_index};
            auto history_at = [&](std::int64_t t) {
                return recent_history(dataset, u, t, options.history_len, train_end);
            };
            try {
                const int wrong_item = sample_negative_item(dataset, u, rng);
                const std::int64_t wrong_time = sample_negative_timestamp(
                    dataset, u, pos.item, pos.time, NegativeTimePurpose::Train, rng, {},
                    options.separation);
                const int wrong_both_item = sample_negative_item(dataset, u, rng);
                const std::int64_t wrong_both_time = sample_negative_timestamp(
                    dataset, u, wrong_both_item, pos.time, NegativeTimePurpose::Train,
                    rng, {}, options.separation);

                out.push_back({u, pos.item, pos.time, 1.0, history_at(pos.time)});
                out.push_back({u, wrong_item, pos.time, 0.0, history_at(pos.time)});
                out.push_back({u, pos.item, wrong_time, 0.0, history_at(wrong_time)});
                out.push_back(
                    {u, wrong_both_item, wrong_both_time, 0.0, history_at(wrong_both_time)});
            } catch (const InfeasibleError&) {
                ++skip_count;
            }
        }
    }
    if (skipped) *skipped = skip_count;
    return out;
}

}  // namespace timelyrec
