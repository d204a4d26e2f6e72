#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace trendlab {

/// A UTC calendar day, stored as days since 1970-01-01.
class Day {
public:
    constexpr Day() = default;
    constexpr explicit Day(std::int32_t serial) : serial_(serial) {}

    static Day from_ymd(int year, unsigned month, unsigned day);

    /// Parses `YYYY-MM-DD`; throws DataError on anything else.
    static Day parse(std::string_view iso);

    std::chrono::year_month_day ymd() const;
    std::string iso() const;
    int year() const;
    unsigned month() const;
    unsigned day_of_month() const;

    constexpr std::int32_t serial() const { return serial_; }

    friend constexpr auto operator<=>(Day, Day) = default;
    friend constexpr Day operator+(Day d, std::int32_t n) { return Day{d.serial_ + n}; }
    friend constexpr Day operator-(Day d, std::int32_t n) { return Day{d.serial_ - n}; }
    friend constexpr std::int32_t operator-(Day a, Day b) { return a.serial_ - b.serial_; }

private:
    std::int32_t serial_ = 0;
};

/// English month name, capitalized ("January").
std::string_view month_name(unsigned month);

/// Inclusive day range.
struct DayRange {
    Day first;
    Day last;

    constexpr bool contains(Day d) const { return first <= d && d <= last; }
    constexpr std::int32_t length() const { return last - first + 1; }
    friend constexpr bool operator==(const DayRange&, const DayRange&) = default;
};

/// Calendar-aligned block of `months` months containing `d`. Blocks start in January,
/// so 6-month blocks are Jan-Jun and Jul-Dec. `months` must divide 12.
DayRange calendar_block(Day d, int months);

}  // namespace trendlab
