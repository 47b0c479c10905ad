#include "timelyrec/report.hpp"

#include <cstdio>
#include <sstream>

#include "timelyrec/calendar.hpp"

namespace timelyrec {

std::string explain_text(const Model& model, const Dataset& dataset,
                         const std::string& user_external,
                         const std::string& item_external, std::int64_t time,
                         const SplitSpec& split) {
    const int user = dataset.user_id(user_external);
    const int item = dataset.item_id(item_external);
    const HistoryWindow history =
        recent_history(dataset, split, user, time, model.config().history_len);

    Explanation explanation;
    const double score =
        model.predict(user, item, time, history, &explanation);

    std::ostringstream out;
    char buf[128];
    out << "target_time=" << time << " user=" << user_external
        << " item=" << item_external << "\n";
    out << "granularity      target  weights(target-normalized)  raw  importance\n";
    for (const auto& rep : explanation.granularities) {
        out << "  " << granularity_name(rep.granularity) << " target="
            << slot_label(rep.granularity, rep.target_slot);
        out << " scaled=[";
        for (std::size_t i = 0; i < rep.weights_target_scaled.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%s%.2f", i ? " " : "",
                          rep.weights_target_scaled[i]);
            out << buf;
        }
        out << "] raw=[";
        for (std::size_t i = 0; i < rep.weights.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%s%.4f", i ? " " : "", rep.weights[i]);
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), "] importance=%.2f", rep.gate);
        out << buf << "\n";
    }
    out << "recent interactions (most recent first):\n";
    for (std::size_t j = 0; j < history.size(); ++j) {
        const CalendarFields f =
            decompose(history[j].time, model.config().utc_offset);
        std::snprintf(buf, sizeof(buf),
                      "  %zu: item=%s month=%s dow=%s date=%s hour=%s similarity=%.2f",
                      j + 1,
                      dataset.item_ids[static_cast<std::size_t>(history[j].item)].c_str(),
                      slot_label(Granularity::Month, f.month).c_str(),
                      slot_label(Granularity::DayOfWeek, f.day_of_week).c_str(),
                      slot_label(Granularity::Date, f.date).c_str(),
                      slot_label(Granularity::Hour, f.hour).c_str(),
                      explanation.history_scores[j]);
        out << buf << "\n";
    }
    std::snprintf(buf, sizeof(buf), "score=%.6f", score);
    out << buf << "\n";
    return out.str();
}

}  // namespace timelyrec
