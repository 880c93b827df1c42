#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace equitop {

/// Shortest decimal form that round-trips the exact double (std::to_chars).
/// Infinities render as "inf"/"-inf"; used for every numeric value we write,
/// so reruns of a seeded pipeline are byte-identical.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text);

std::vector<std::string> split_csv_line(std::string_view line);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace equitop
