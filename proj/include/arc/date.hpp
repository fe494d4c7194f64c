#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace arc {

using Date = std::chrono::year_month_day;

// ISO-8601 YYYY-MM-DD. Throws std::runtime_error on malformed input.
Date parse_date(std::string_view s);
std::string format_date(const Date& d);

// b - a in whole days.
int days_between(const Date& a, const Date& b);
Date add_days(const Date& d, int days);

// Same day-of-month w months earlier, day clamped to the target month's
// last day (2019-03-31 - 1 -> 2019-02-28).
Date subtract_months(const Date& d, int w);

// Calendar month, used for temporal splits and drift indexing.
struct YearMonth {
    int year = 0;
    int month = 1;  // 1..12

    auto operator<=>(const YearMonth&) const = default;

    // Months since year 0, for distances and iteration.
    int index() const { return year * 12 + (month - 1); }
    YearMonth plus_months(int m) const;
    std::string str() const;  // "2017-08"

    static YearMonth parse(std::string_view s);
    static YearMonth of(const Date& d);
};

}  // namespace arc
