#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace equitop {

/// Proleptic Gregorian calendar date. Month arithmetic clamps to the end of
/// the target month (Jan 31 + 1mo = Feb 28/29).
struct Date {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..days_in_month

    auto operator<=>(const Date&) const = default;

    static bool is_leap_year(int year);
    static int days_in_month(int year, int month);

    bool valid() const;

    /// Parses strict ISO-8601 "YYYY-MM-DD"; nullopt on malformed or
    /// non-existent dates.
    static std::optional<Date> parse(std::string_view text);

    /// "YYYY-MM-DD", zero padded.
    std::string to_string() const;

    Date add_months(int delta) const;
};

}  // namespace equitop
