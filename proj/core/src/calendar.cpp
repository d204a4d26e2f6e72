#include "trendlab/calendar.hpp"

#include "trendlab/errors.hpp"

#include <array>
#include <charconv>

#include <fmt/format.h>

namespace trendlab {

namespace {

bool parse_digits(std::string_view text, int& out) {
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

Day Day::from_ymd(int year, unsigned month, unsigned day) {
    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                          std::chrono::day{day}};
    if (!ymd.ok()) {
        throw DataError(fmt::format("invalid calendar date {:04}-{:02}-{:02}", year, month, day));
    }
    return Day{static_cast<std::int32_t>(std::chrono::sys_days{ymd}.time_since_epoch().count())};
}

Day Day::parse(std::string_view iso) {
    int y = 0;
    int m = 0;
    int d = 0;
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-' || !parse_digits(iso.substr(0, 4), y) ||
        !parse_digits(iso.substr(5, 2), m) || !parse_digits(iso.substr(8, 2), d)) {
        throw DataError(fmt::format("expected YYYY-MM-DD, got '{}'", iso));
    }
    return from_ymd(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

std::chrono::year_month_day Day::ymd() const {
    return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{serial_}}};
}

int Day::year() const { return static_cast<int>(ymd().year()); }
unsigned Day::month() const { return static_cast<unsigned>(ymd().month()); }
unsigned Day::day_of_month() const { return static_cast<unsigned>(ymd().day()); }

std::string Day::iso() const {
    const auto v = ymd();
    return fmt::format("{:04}-{:02}-{:02}", static_cast<int>(v.year()),
                       static_cast<unsigned>(v.month()), static_cast<unsigned>(v.day()));
}

std::string_view month_name(unsigned month) {
    static constexpr std::array<std::string_view, 12> names{
        "January", "February", "March",     "April",   "May",      "June",
        "July",    "August",   "September", "October", "November", "December"};
    if (month < 1 || month > 12) {
        throw DataError(fmt::format("month out of range: {}", month));
    }
    return names[month - 1];
}

DayRange calendar_block(Day d, int months) {
    if (months <= 0 || 12 % months != 0) {
        throw ConfigError(fmt::format("interval_months must divide 12, got {}", months));
    }
    const int year = d.year();
    const auto month = static_cast<int>(d.month());
    const int first_month = ((month - 1) / months) * months + 1;
    const Day first = Day::from_ymd(year, static_cast<unsigned>(first_month), 1);
    const int next_month = first_month + months;
    const Day next = next_month > 12 ? Day::from_ymd(year + 1, 1, 1)
                                     : Day::from_ymd(year, static_cast<unsigned>(next_month), 1);
    return {first, next - 1};
}

}  // namespace trendlab
