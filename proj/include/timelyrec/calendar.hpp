#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "timelyrec/common.hpp"

namespace timelyrec {

enum class Granularity : int { Month = 0, DayOfWeek = 1, Date = 2, Hour = 3 };

inline constexpr int kGranularityCount = 4;

inline constexpr std::array<Granularity, kGranularityCount> kAllGranularities = {
    Granularity::Month, Granularity::DayOfWeek, Granularity::Date,
    Granularity::Hour};

int slot_count(Granularity g);
const char* granularity_name(Granularity g);

// Decomposed civil time: month 0..11, day-of-week 0..6 (Monday = 0),
// date 0..30 (day of month minus one), hour 0..23.
struct CalendarFields {
    int month;
    int day_of_week;
    int date;
    int hour;

    int slot(Granularity g) const;
};

// Proleptic Gregorian decomposition of (t + offset) seconds since the Unix
// epoch. Independent of host locale and timezone database.
CalendarFields decompose(std::int64_t t_seconds, std::int64_t offset_seconds = 0);

// Cyclic slot arithmetic: (slot + n) mod slot_count(g), always in range.
int shift_slot(int slot, int n, Granularity g);

// Untrained sinusoidal encoding of the timestamp in hours:
// entry j = sin((t/3600)/10000^(j/d)) for even j, cos with exponent (j-1)/d
// for odd j.
Vec temporal_encoding(std::int64_t t_seconds, int d);

struct GranularityConfig {
    std::array<bool, kGranularityCount> enabled = {true, true, true, true};
    std::array<int, kGranularityCount> window_radius = {2, 1, 6, 5};

    bool is_enabled(Granularity g) const { return enabled[static_cast<int>(g)]; }
    int radius(Granularity g) const { return window_radius[static_cast<int>(g)]; }

    // Radius must satisfy r <= floor((slots - 1) / 2) so a window never wraps
    // onto itself twice; at least one granularity must be enabled.
    void validate() const;
};

// Human-readable slot label ("Feb", "Sun", "16", "12 AM") for reports.
std::string slot_label(Granularity g, int slot);

}  // namespace timelyrec
