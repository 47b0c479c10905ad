#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "timelyrec/calendar.hpp"
#include "timelyrec/data.hpp"
#include "timelyrec/synth.hpp"

using namespace timelyrec;

namespace {

struct TempPath {
    std::string path;
    explicit TempPath(const std::string& name) : path("tmp_synth_" + name) {}
    ~TempPath() { std::remove(path.c_str()); }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Signed cyclic distance from a planted slot to an observed slot.
int cyclic_offset(int observed, int planted, int slots) {
    int diff = ((observed - planted) % slots + slots) % slots;
    if (diff > slots / 2) diff -= slots;
    return diff;
}

}  // namespace

TEST_CASE("spec validation rejects out-of-range settings") {
    SynthSpec spec;
    CHECK_NOTHROW(spec.validate());
    spec.users = 0;
    CHECK_THROWS_AS(spec.validate(), ContractError);
    spec = SynthSpec{};
    spec.items_per_user = spec.items + 1;
    CHECK_THROWS_AS(spec.validate(), ContractError);
    spec = SynthSpec{};
    spec.jitter = 4;  // day-of-week windows only support up to 3
    CHECK_THROWS_AS(spec.validate(), ContractError);
    spec = SynthSpec{};
    spec.jitter = -1;
    CHECK_THROWS_AS(spec.validate(), ContractError);
    spec = SynthSpec{};
    spec.span_days = 3;
    CHECK_THROWS_AS(spec.validate(), ContractError);
    spec = SynthSpec{};
    spec.trend_item = spec.items;
    CHECK_THROWS_AS(spec.validate(), ContractError);
    spec = SynthSpec{};
    spec.trend_prob = 1.5;
    CHECK_THROWS_AS(spec.validate(), ContractError);
}

TEST_CASE("zero jitter lands every interaction exactly on the planted slots") {
    TempPath tsv("exact.tsv");
    SynthSpec spec;
    spec.users = 20;
    spec.items = 30;
    spec.interactions_per_user = 12;
    spec.jitter = 0;
    spec.seed = 9;
    const SynthResult result = synthesize(spec, tsv.path);
    REQUIRE(result.truth.size() == 20);

    const Dataset d = load_interactions(tsv.path);
    REQUIRE(d.n_users() == 20);
    for (const SynthUserTruth& truth : result.truth) {
        REQUIRE(truth.preferred_hour >= 0);
        REQUIRE(truth.preferred_day_of_week >= 0);
        CHECK(truth.preferred_items.size() == 5);
        // External ids are u<N>, so interned index order matches user index.
        const auto& events = d.events[static_cast<std::size_t>(truth.user)];
        CHECK(static_cast<int>(events.size()) == 12);
        for (const auto& ev : events) {
            const CalendarFields f = decompose(ev.time);
            CHECK(f.hour == truth.preferred_hour);
            CHECK(f.day_of_week == truth.preferred_day_of_week);
            std::set<std::string> preferred;
            for (int raw : truth.preferred_items)
                preferred.insert("i" + std::to_string(raw));
            CHECK(preferred.count(d.item_ids[static_cast<std::size_t>(ev.item)]) == 1);
        }
    }
}

TEST_CASE("jitter one stays within one slot and spreads across the window") {
    TempPath tsv("jitter.tsv");
    SynthSpec spec;
    spec.users = 120;
    spec.items = 50;
    spec.interactions_per_user = 30;
    spec.jitter = 1;
    spec.seed = 21;
    const SynthResult result = synthesize(spec, tsv.path);
    const Dataset d = load_interactions(tsv.path);

    std::array<long, 3> hour_counts = {0, 0, 0};  // offsets -1, 0, +1
    long total = 0;
    for (const SynthUserTruth& truth : result.truth) {
        for (const auto& ev : d.events[static_cast<std::size_t>(truth.user)]) {
            const CalendarFields f = decompose(ev.time);
            const int hour_off = cyclic_offset(f.hour, truth.preferred_hour, 24);
            const int dow_off = cyclic_offset(f.day_of_week, truth.preferred_day_of_week, 7);
            REQUIRE(std::abs(hour_off) <= 1);
            REQUIRE(std::abs(dow_off) <= 1);
            ++hour_counts[static_cast<std::size_t>(hour_off + 1)];
            ++total;
        }
    }
    CHECK(total == 120 * 30);
    // The jitter draw is uniform over {-1, 0, +1}; a chi-square statistic
    // with two degrees of freedom stays below the 0.1% critical value.
    const double expected = static_cast<double>(total) / 3.0;
    double chi2 = 0.0;
    for (long c : hour_counts) {
        const double delta = static_cast<double>(c) - expected;
        chi2 += delta * delta / expected;
    }
    CHECK(chi2 < 13.82);
}

TEST_CASE("planting can be disabled per dimension") {
    TempPath tsv("noplant.tsv");
    SynthSpec spec;
    spec.users = 40;
    spec.items = 20;
    spec.interactions_per_user = 20;
    spec.plant_hour = false;
    spec.seed = 33;
    const SynthResult result = synthesize(spec, tsv.path);
    const Dataset d = load_interactions(tsv.path);

    std::set<int> hours_seen;
    for (const SynthUserTruth& truth : result.truth) {
        CHECK(truth.preferred_hour == -1);
        CHECK(truth.preferred_day_of_week >= 0);
        for (const auto& ev : d.events[static_cast<std::size_t>(truth.user)])
            hours_seen.insert(decompose(ev.time).hour);
    }
    // Unplanted hours are uniform over the whole day; with 800 draws every
    // slot should appear.
    CHECK(hours_seen.size() == 24);
}

TEST_CASE("the trend item dominates inside its window") {
    TempPath tsv("trend.tsv");
    SynthSpec spec;
    spec.users = 100;
    spec.items = 60;
    spec.interactions_per_user = 30;
    spec.seed = 5;
    spec.trend_item = 59;
    spec.trend_onset = spec.start_time + 100ll * 86400;
    spec.trend_window = 60ll * 86400;
    spec.trend_prob = 0.8;
    synthesize(spec, tsv.path);
    const Dataset d = load_interactions(tsv.path);

    // The trend item is planted far above its chance rate inside the window.
    long inside = 0, inside_trend = 0, outside = 0, outside_trend = 0;
    for (int u = 0; u < d.n_users(); ++u) {
        for (const auto& ev : d.events[static_cast<std::size_t>(u)]) {
            const bool in_window = ev.time >= spec.trend_onset &&
                                   ev.time <= spec.trend_onset + spec.trend_window;
            const bool is_trend = d.item_ids[static_cast<std::size_t>(ev.item)] == "i59";
            (in_window ? inside : outside) += 1;
            if (is_trend) (in_window ? inside_trend : outside_trend) += 1;
        }
    }
    REQUIRE(inside > 200);
    REQUIRE(outside > 1000);
    const double inside_rate = static_cast<double>(inside_trend) / static_cast<double>(inside);
    const double outside_rate =
        static_cast<double>(outside_trend) / static_cast<double>(outside);
    CHECK(inside_rate > 0.6);
    CHECK(outside_rate < 0.2);
}

TEST_CASE("output is deterministic in the seed and varies with it") {
    TempPath a("det_a.tsv"), b("det_b.tsv"), c("det_c.tsv");
    SynthSpec spec;
    spec.users = 15;
    spec.items = 25;
    spec.interactions_per_user = 10;
    spec.seed = 77;
    synthesize(spec, a.path);
    synthesize(spec, b.path);
    spec.seed = 78;
    synthesize(spec, c.path);
    CHECK(read_file(a.path) == read_file(b.path));
    CHECK(read_file(a.path) != read_file(c.path));
}

TEST_CASE("timestamps stay inside the configured span") {
    TempPath tsv("span.tsv");
    SynthSpec spec;
    spec.users = 30;
    spec.items = 20;
    spec.interactions_per_user = 15;
    spec.span_days = 10;
    spec.seed = 3;
    synthesize(spec, tsv.path);
    const Dataset d = load_interactions(tsv.path);
    for (int u = 0; u < d.n_users(); ++u) {
        for (const auto& ev : d.events[static_cast<std::size_t>(u)]) {
            CHECK(ev.time >= spec.start_time);
            // Day-of-week adjustment can push a day forward by up to six days.
            CHECK(ev.time < spec.start_time + (spec.span_days + 7) * 86400ll);
        }
    }
}

TEST_CASE("the truth sidecar matches the returned truth") {
    TempPath tsv("truth.tsv");
    TempPath truth("truth.json");
    SynthSpec spec;
    spec.users = 8;
    spec.items = 15;
    spec.items_per_user = 3;
    spec.interactions_per_user = 6;
    spec.seed = 101;
    const SynthResult result = synthesize(spec, tsv.path, truth.path);

    const nlohmann::json doc = nlohmann::json::parse(read_file(truth.path));
    REQUIRE(doc.is_array());
    REQUIRE(doc.size() == 8);
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const SynthUserTruth& t = result.truth[i];
        CHECK(doc[i].at("user").get<std::string>() == "u" + std::to_string(t.user));
        CHECK(doc[i].at("preferred_hour").get<int>() == t.preferred_hour);
        CHECK(doc[i].at("preferred_day_of_week").get<int>() == t.preferred_day_of_week);
        const auto items = doc[i].at("preferred_items").get<std::vector<std::string>>();
        REQUIRE(items.size() == t.preferred_items.size());
        for (std::size_t j = 0; j < items.size(); ++j)
            CHECK(items[j] == "i" + std::to_string(t.preferred_items[j]));
    }
}

TEST_CASE("an unwritable output path raises an io error") {
    SynthSpec spec;
    spec.users = 2;
    spec.items = 6;
    spec.interactions_per_user = 3;
    CHECK_THROWS_AS(synthesize(spec, "no_such_dir/out.tsv"), IoError);
}
