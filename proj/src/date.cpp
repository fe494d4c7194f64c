#include "arc/date.hpp"

#include <charconv>
#include <stdexcept>

namespace arc {

namespace {

int parse_int(std::string_view s, std::string_view what) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::runtime_error("bad " + std::string(what) + ": '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

Date parse_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        throw std::runtime_error("bad date: '" + std::string(s) + "' (want YYYY-MM-DD)");
    }
    int y = parse_int(s.substr(0, 4), "year");
    int m = parse_int(s.substr(5, 2), "month");
    int d = parse_int(s.substr(8, 2), "day");
    Date date = std::chrono::year{y} / m / d;
    if (!date.ok()) {
        throw std::runtime_error("invalid calendar date: '" + std::string(s) + "'");
    }
    return date;
}

std::string format_date(const Date& d) {
    char buf[11];
    int y = int(d.year());
    unsigned m = unsigned(d.month());
    unsigned dd = unsigned(d.day());
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, dd);
    return buf;
}

int days_between(const Date& a, const Date& b) {
    using std::chrono::sys_days;
    return int((sys_days(b) - sys_days(a)).count());
}

Date add_days(const Date& d, int days) {
    using std::chrono::sys_days;
    return Date{sys_days(d) + std::chrono::days{days}};
}

Date subtract_months(const Date& d, int w) {
    auto ym = d.year() / d.month();
    ym -= std::chrono::months{w};
    Date out = ym / d.day();
    if (!out.ok()) {
        out = ym / std::chrono::last;
    }
    return out;
}

YearMonth YearMonth::plus_months(int m) const {
    int idx = index() + m;
    int y = idx / 12;
    int mm = idx % 12;
    if (mm < 0) {
        mm += 12;
        y -= 1;
    }
    return YearMonth{y, mm + 1};
}

std::string YearMonth::str() const {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

YearMonth YearMonth::parse(std::string_view s) {
    if (s.size() != 7 || s[4] != '-') {
        throw std::runtime_error("bad month: '" + std::string(s) + "' (want YYYY-MM)");
    }
    YearMonth ym{parse_int(s.substr(0, 4), "year"), parse_int(s.substr(5, 2), "month")};
    if (ym.month < 1 || ym.month > 12) {
        throw std::runtime_error("invalid month: '" + std::string(s) + "'");
    }
    return ym;
}

YearMonth YearMonth::of(const Date& d) {
    return YearMonth{int(d.year()), int(unsigned(d.month()))};
}

}  // namespace arc
