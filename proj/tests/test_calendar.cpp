#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <ctime>

#include "timelyrec/calendar.hpp"
#include "timelyrec/common.hpp"

using namespace timelyrec;

TEST_CASE("decompose known timestamps") {
    const CalendarFields epoch = decompose(0, 0);
    CHECK(epoch.month == 0);        // January
    CHECK(epoch.day_of_week == 3);  // Thursday, Monday = 0
    CHECK(epoch.date == 0);         // day 1
    CHECK(epoch.hour == 0);

    const CalendarFields f = decompose(1045355829, 0);
    CHECK(f.month == 1);        // February
    CHECK(f.day_of_week == 6);  // Sunday
    CHECK(f.date == 15);        // day 16
    CHECK(f.hour == 0);         // 12 AM

    const CalendarFields last = decompose(86399, 0);
    CHECK(last.month == 0);
    CHECK(last.date == 0);
    CHECK(last.hour == 23);
}

TEST_CASE("decompose applies the fixed offset") {
    // One hour east of UTC pushes the epoch instant to 01:00.
    CHECK(decompose(0, 3600).hour == 1);
    // The offset may also step across midnight.
    const CalendarFields f = decompose(86399, 3600);
    CHECK(f.hour == 0);
    CHECK(f.date == 1);
}

TEST_CASE("decompose rejects negative adjusted timestamps") {
    CHECK_THROWS_AS(decompose(-1, 0), ContractError);
    CHECK_THROWS_AS(decompose(10, -11), ContractError);
    CHECK_NOTHROW(decompose(10, -10));
}

TEST_CASE("decompose agrees with the C library on random timestamps") {
    Rng rng{0xCA1E, 0xDA7E5};
    for (int i = 0; i < 1000; ++i) {
        const std::int64_t t = rng.next_in(0, (std::int64_t{1} << 31) - 1);
        const CalendarFields got = decompose(t, 0);
        std::tm tm{};
        const time_t tt = static_cast<time_t>(t);
        gmtime_r(&tt, &tm);
        CHECK(got.month == tm.tm_mon);
        CHECK(got.day_of_week == (tm.tm_wday + 6) % 7);  // tm uses Sunday = 0
        CHECK(got.date == tm.tm_mday - 1);
        CHECK(got.hour == tm.tm_hour);
    }
}

TEST_CASE("slot indices stay below their slot counts") {
    CHECK(slot_count(Granularity::Month) == 12);
    CHECK(slot_count(Granularity::DayOfWeek) == 7);
    CHECK(slot_count(Granularity::Date) == 31);
    CHECK(slot_count(Granularity::Hour) == 24);

    Rng rng{0x51075};
    for (int i = 0; i < 200; ++i) {
        const std::int64_t t = rng.next_in(0, (std::int64_t{1} << 31) - 1);
        const CalendarFields f = decompose(t, 0);
        for (Granularity g : kAllGranularities) {
            CHECK(f.slot(g) >= 0);
            CHECK(f.slot(g) < slot_count(g));
        }
    }
}

TEST_CASE("shift_slot wraps cyclically") {
    CHECK(shift_slot(1, 2, Granularity::Month) == 3);    // Feb + 2 = Apr
    CHECK(shift_slot(11, 2, Granularity::Month) == 1);   // Dec + 2 = Feb
    CHECK(shift_slot(0, -1, Granularity::Hour) == 23);
    for (Granularity g : kAllGranularities)
        for (int h = 0; h < slot_count(g); ++h)
            CHECK(shift_slot(h, slot_count(g), g) == h);
}

TEST_CASE("shift_slot round trip") {
    for (Granularity g : kAllGranularities)
        for (int s = 0; s < slot_count(g); ++s)
            for (int n = -40; n <= 40; ++n)
                CHECK(shift_slot(shift_slot(s, n, g), -n, g) == s);
}

TEST_CASE("temporal encoding matches the closed form") {
    const Vec zero = temporal_encoding(0, 6);
    for (std::size_t j = 0; j < zero.size(); ++j)
        CHECK(zero[j] == doctest::Approx(j % 2 == 0 ? 0.0 : 1.0).epsilon(1e-15));

    const Vec one_hour = temporal_encoding(3600, 2);
    CHECK(one_hour[0] == doctest::Approx(std::sin(1.0)).epsilon(1e-12));
    CHECK(one_hour[1] == doctest::Approx(std::cos(1.0)).epsilon(1e-12));
    CHECK(one_hour[0] == doctest::Approx(0.84147).epsilon(1e-5));
    CHECK(one_hour[1] == doctest::Approx(0.54030).epsilon(1e-5));

    // Generic entries: hours scaled by 10000^(-j/d) pairwise.
    const std::int64_t t = 123456789;
    const int d = 8;
    const Vec v = temporal_encoding(t, d);
    const double hours = static_cast<double>(t) / 3600.0;
    for (int j = 0; j < d; j += 2) {
        const double f = hours / std::pow(10000.0, static_cast<double>(j) / d);
        CHECK(v[static_cast<std::size_t>(j)] == doctest::Approx(std::sin(f)).epsilon(1e-12));
        CHECK(v[static_cast<std::size_t>(j + 1)] ==
              doctest::Approx(std::cos(f)).epsilon(1e-12));
    }
}

TEST_CASE("temporal encoding stays in [-1, 1]") {
    Rng rng{0x7E};
    for (int i = 0; i < 100; ++i) {
        const Vec v = temporal_encoding(rng.next_in(0, 4000000000LL), 16);
        for (double x : v) {
            CHECK(x >= -1.0);
            CHECK(x <= 1.0);
        }
    }
}

TEST_CASE("temporal encoding entry 0 has period 2*pi hours") {
    const std::int64_t period = static_cast<std::int64_t>(
        std::llround(2.0 * 3.14159265358979323846 * 3600.0));
    for (std::int64_t t : {std::int64_t{0}, std::int64_t{5000}, std::int64_t{987654321}}) {
        const double a = temporal_encoding(t, 4)[0];
        const double b = temporal_encoding(t + period, 4)[0];
        CHECK(std::abs(a - b) < 1e-3);
    }
}

TEST_CASE("granularity config validation") {
    GranularityConfig cfg;
    CHECK_NOTHROW(cfg.validate());  // defaults r = (2, 1, 6, 5)

    cfg.window_radius[static_cast<int>(Granularity::DayOfWeek)] = 3;
    CHECK_NOTHROW(cfg.validate());  // floor((7 - 1) / 2) = 3 is the bound
    cfg.window_radius[static_cast<int>(Granularity::DayOfWeek)] = 4;
    CHECK_THROWS_AS(cfg.validate(), ContractError);

    cfg = GranularityConfig{};
    cfg.window_radius[static_cast<int>(Granularity::Hour)] = -1;
    CHECK_THROWS_AS(cfg.validate(), ContractError);

    cfg = GranularityConfig{};
    cfg.enabled = {false, false, false, false};
    CHECK_THROWS_AS(cfg.validate(), ContractError);

    // A disabled granularity's radius is not checked.
    cfg = GranularityConfig{};
    cfg.enabled[static_cast<int>(Granularity::Month)] = false;
    cfg.window_radius[static_cast<int>(Granularity::Month)] = 100;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("slot labels") {
    CHECK(slot_label(Granularity::Month, 1) == "Feb");
    CHECK(slot_label(Granularity::DayOfWeek, 0) == "Mon");
    CHECK(slot_label(Granularity::DayOfWeek, 6) == "Sun");
    CHECK(slot_label(Granularity::Date, 15) == "16");
    CHECK(slot_label(Granularity::Hour, 0) == "12 AM");
    CHECK(slot_label(Granularity::Hour, 12) == "12 PM");
    CHECK(slot_label(Granularity::Hour, 15) == "3 PM");
}
