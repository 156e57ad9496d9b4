#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "labb/errors.hpp"

namespace labb {

// Calendar date stored as days since 1970-01-01, parsed from and formatted
// as ISO-8601 (YYYY-MM-DD).
class Date {
public:
    Date() = default;
    explicit constexpr Date(int32_t days_since_epoch) : days_(days_since_epoch) {}

    static Date from_ymd(int year, unsigned month, unsigned day) {
        std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{month},
                                        std::chrono::day{day}};
        if (!ymd.ok())
            throw ValidationError("invalid calendar date " + std::to_string(year) + "-" +
                                  std::to_string(month) + "-" + std::to_string(day));
        auto sd = std::chrono::sys_days{ymd};
        return Date{static_cast<int32_t>(sd.time_since_epoch().count())};
    }

    static Date parse(std::string_view iso) {
        int y = 0;
        unsigned m = 0, d = 0;
        char sep1 = 0, sep2 = 0, trail = 0;
        std::string s(iso);
        int fields = std::sscanf(s.c_str(), "%d%c%u%c%u%c", &y, &sep1, &m, &sep2, &d, &trail);
        if (fields != 5 || sep1 != '-' || sep2 != '-')
            throw ValidationError("cannot parse date '" + s + "' (expected YYYY-MM-DD)");
        return from_ymd(y, m, d);
    }

    std::string to_string() const {
        auto ymd = ymd_();
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
        return buf;
    }

    int year() const { return static_cast<int>(ymd_().year()); }
    unsigned month() const { return static_cast<unsigned>(ymd_().month()); }
    unsigned day() const { return static_cast<unsigned>(ymd_().day()); }

    // year*12 + month, one calendar conversion; distinct per calendar month.
    long month_key() const {
        auto ymd = ymd_();
        return static_cast<long>(static_cast<int>(ymd.year())) * 12 +
               static_cast<unsigned>(ymd.month());
    }

    constexpr int32_t days_since_epoch() const { return days_; }

    friend constexpr Date operator+(Date a, int32_t n) { return Date{a.days_ + n}; }
    friend constexpr int32_t operator-(Date a, Date b) { return a.days_ - b.days_; }
    friend constexpr auto operator<=>(Date, Date) = default;

private:
    std::chrono::year_month_day ymd_() const {
        return std::chrono::year_month_day{
            std::chrono::sys_days{std::chrono::days{days_}}};
    }

    int32_t days_ = 0;
};

// Span of a date range in Julian years; used for annualizing.
inline double years_between(Date start, Date end) {
    return static_cast<double>(end - start) / 365.25;
}

} // namespace labb
