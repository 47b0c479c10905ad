#include "timelyrec/synth.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "timelyrec/calendar.hpp"

namespace timelyrec {

void SynthSpec::validate() const {
    if (users < 1 || items < 1) throw ContractError("SynthSpec: users and items must be >= 1");
    if (interactions_per_user < 1)
        throw ContractError("SynthSpec: interactions_per_user must be >= 1");
    if (items_per_user < 1)
        throw ContractError("SynthSpec: preferred item set must be non-empty");
    if (items_per_user > items)
        throw ContractError("SynthSpec: items_per_user exceeds item count");
    if (jitter < 0) throw ContractError("SynthSpec: jitter must be >= 0");
    if (plant_hour && jitter > 11) throw ContractError("SynthSpec: hour jitter too large");
    if (plant_day_of_week && jitter > 3)
        throw ContractError("SynthSpec: day-of-week jitter too large");
    if (start_time < 0) throw ContractError("SynthSpec: start_time must be >= 0");
    if (span_days < 7) throw ContractError("SynthSpec: span must cover at least a week");
    if (trend_prob < 0.0 || trend_prob > 1.0)
        throw ContractError("SynthSpec: trend_prob must be in [0, 1]");
    if (trend_item >= items) throw ContractError("SynthSpec: trend item out of range");
}

SynthResult synthesize(const SynthSpec& spec, const std::string& tsv_path,
                       const std::string& truth_path) {
    spec.validate();
    std::ofstream out(tsv_path);
    if (!out) throw IoError("cannot open output file: " + tsv_path);

    Rng rng{spec.seed, 0x57A7Cull};
    const std::int64_t base_day = spec.start_time / 86400;

    SynthResult result;
    for (int u = 0; u < spec.users; ++u) {
        SynthUserTruth truth;
        truth.user = u;
        truth.preferred_hour =
            spec.plant_hour ? static_cast<int>(rng.next_below(24)) : -1;
        truth.preferred_day_of_week =
            spec.plant_day_of_week ? static_cast<int>(rng.next_below(7)) : -1;
        std::unordered_set<int> chosen;
        while (static_cast<int>(chosen.size()) < spec.items_per_user)
            chosen.insert(static_cast<int>(rng.next_below(
                static_cast<std::uint64_t>(spec.items))));
        truth.preferred_items.assign(chosen.begin(), chosen.end());
        std::sort(truth.preferred_items.begin(), truth.preferred_items.end());

        for (int k = 0; k < spec.interactions_per_user; ++k) {
            std::int64_t day = base_day + rng.next_in(0, spec.span_days - 1);
            if (truth.preferred_day_of_week >= 0) {
                const int target = shift_slot(
                    truth.preferred_day_of_week,
                    static_cast<int>(rng.next_in(-spec.jitter, spec.jitter)),
                    Granularity::DayOfWeek);
                const int current = static_cast<int>((day + 3) % 7);
                day += (target - current + 7) % 7;
            }
            const int hour =
                truth.preferred_hour >= 0
                    ? shift_slot(truth.preferred_hour,
                                 static_cast<int>(rng.next_in(-spec.jitter, spec.jitter)),
                                 Granularity::Hour)
                    : static_cast<int>(rng.next_below(24));
            const std::int64_t t = day * 86400 + hour * 3600 + rng.next_in(0, 59) * 60 +
                                   rng.next_in(0, 59);

            int item;
            if (spec.trend_item >= 0 && t >= spec.trend_onset &&
                t <= spec.trend_onset + spec.trend_window &&
                rng.next_unit() < spec.trend_prob) {
                item = spec.trend_item;
            } else {
                item = truth.preferred_items[rng.next_below(
                    truth.preferred_items.size())];
            }
            out << 'u' << u << '\t' << 'i' << item << '\t' << t << '\n';
        }
        result.truth.push_back(std::move(truth));
    }
    if (!out) throw IoError("write failed: " + tsv_path);

    if (!truth_path.empty()) {
        nlohmann::json doc = nlohmann::json::array();
        for (const SynthUserTruth& t : result.truth) {
            nlohmann::json entry;
            entry["user"] = "u" + std::to_string(t.user);
            entry["preferred_hour"] = t.preferred_hour;
            entry["preferred_day_of_week"] = t.preferred_day_of_week;
            nlohmann::json items = nlohmann::json::array();
            for (int i : t.preferred_items) items.push_back("i" + std::to_string(i));
            entry["preferred_items"] = items;
            doc.push_back(std::move(entry));
        }
        std::ofstream truth_out(truth_path);
        if (!truth_out) throw IoError("cannot open output file: " + truth_path);
        truth_out << doc.dump(2) << '\n';
        if (!truth_out) throw IoError("write failed: " + truth_path);
    }
    return result;
}

}  // namespace timelyrec
