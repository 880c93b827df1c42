#include "equitop/date.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>

namespace equitop {

bool Date::is_leap_year(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int Date::days_in_month(int year, int month) {
    static constexpr int table[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap_year(year)) return 29;
    return table[month - 1];
}

bool Date::valid() const {
    if (month < 1 || month > 12) return false;
    if (day < 1 || day > days_in_month(year, month)) return false;
    return true;
}

std::optional<Date> Date::parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
    }
    Date d;
    std::from_chars(text.data(), text.data() + 4, d.year);
    std::from_chars(text.data() + 5, text.data() + 7, d.month);
    std::from_chars(text.data() + 8, text.data() + 10, d.day);
    if (!d.valid()) return std::nullopt;
    return d;
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date Date::add_months(int delta) const {
    const int index = year * 12 + (month - 1) + delta;
    int new_year = index / 12;
    int new_month = index % 12;
    if (new_month < 0) {
        new_month += 12;
        new_year -= 1;
    }
    Date out{new_year, new_month + 1, day};
    out.day = std::min(out.day, days_in_month(out.year, out.month));
    return out;
}

}  // namespace equitop
