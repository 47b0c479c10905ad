#include "timelyrec/calendar.hpp"

#include <cmath>

namespace timelyrec {

int slot_count(Granularity g) {
    switch (g) {
        case Granularity::Month: return 12;
        case Granularity::DayOfWeek: return 7;
        case Granularity::Date: return 31;
        case Granularity::Hour: return 24;
    }
    throw ContractError("unknown granularity");
}

const char* granularity_name(Granularity g) {
    switch (g) {
        case Granularity::Month: return "month";
        case Granularity::DayOfWeek: return "day_of_week";
        case Granularity::Date: return "date";
        case Granularity::Hour: return "hour";
    }
    throw ContractError("unknown granularity");
}

int CalendarFields::slot(Granularity g) const {
    switch (g) {
        case Granularity::Month: return month;
        case Granularity::DayOfWeek: return day_of_week;
        case Granularity::Date: return date;
        case Granularity::Hour: return hour;
    }
    throw ContractError("unknown granularity");
}

namespace {

// Days-since-epoch to proleptic Gregorian (y, m, d), era-based algorithm.
void civil_from_days(std::int64_t z, std::int64_t& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const std::int64_t doe = z - era * 146097;                                // [0, 146096]
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = yoe + era * 400;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);         // [0, 365]
    const std::int64_t mp = (5 * doy + 2) / 153;                              // [0, 11]
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);                       // [1, 31]
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);                          // [1, 12]
    y += (m <= 2);
}

}  // namespace

CalendarFields decompose(std::int64_t t_seconds, std::int64_t offset_seconds) {
    const std::int64_t t = t_seconds + offset_seconds;
    if (t < 0)
        throw ContractError("decompose: adjusted timestamp is negative");

    const std::int64_t days = t / 86400;
    const std::int64_t sod = t % 86400;

    std::int64_t year;
    int month1, day1;
    civil_from_days(days, year, month1, day1);

    CalendarFields f;
    f.month = month1 - 1;
    // 1970-01-01 was a Thursday; Monday = 0.
    f.day_of_week = static_cast<int>((days % 7 + 7 + 3) % 7);
    f.date = day1 - 1;
    f.hour = static_cast<int>(sod / 3600);
    return f;
}

int shift_slot(int slot, int n, Granularity g) {
    const int count = slot_count(g);
    if (slot < 0 || slot >= count)
        throw ContractError("shift_slot: slot out of range");
    const int shifted = (slot + n % count + count) % count;
    return shifted;
}

Vec temporal_encoding(std::int64_t t_seconds, int d) {
    if (d < 1) throw ContractError("temporal_encoding: dimension must be >= 1");
    const double hours = static_cast<double>(t_seconds) / 3600.0;
    Vec out(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        const int exp_num = (j % 2 == 0) ? j : j - 1;
        const double denom = std::pow(10000.0, static_cast<double>(exp_num) / d);
        out[static_cast<std::size_t>(j)] =
            (j % 2 == 0) ? std::sin(hours / denom) : std::cos(hours / denom);
    }
    return out;
}

void GranularityConfig::validate() const {
    bool any = false;
    for (Granularity g : kAllGranularities) {
        const int idx = static_cast<int>(g);
        if (!enabled[idx]) continue;
        any = true;
        if (window_radius[idx] < 0)
            throw ContractError("GranularityConfig: negative window radius");
        const int bound = (slot_count(g) - 1) / 2;
        if (window_radius[idx] > bound)
            throw ContractError(std::string("GranularityConfig: window radius for ") +
                                granularity_name(g) + " exceeds " +
                                std::to_string(bound));
    }
    if (!any) throw ContractError("GranularityConfig: no granularity enabled");
}

std::string slot_label(Granularity g, int slot) {
    static const char* kMonths[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                    "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    static const char* kDays[] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
    if (slot < 0 || slot >= slot_count(g))
        throw ContractError("slot_label: slot out of range");
    switch (g) {
        case Granularity::Month: return kMonths[slot];
        case Granularity::DayOfWeek: return kDays[slot];
        case Granularity::Date: return std::to_string(slot + 1);
        case Granularity::Hour: {
            const int h12 = slot % 12 == 0 ? 12 : slot % 12;
            return std::to_string(h12) + (slot < 12 ? " AM" : " PM");
        }
    }
    throw ContractError("unknown granularity");
}

}  // namespace timelyrec
