#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the loaders and the canonical text formats.
namespace a2c::text {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string> split_list(std::string_view s, char sep = ',');
std::string to_lower(std::string_view s);

std::optional<double> parse_double(std::string_view s);
std::optional<std::uint64_t> parse_uint(std::string_view s);

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);
std::string format_doubles(std::span<const double> values);
std::vector<double> parse_doubles(std::string_view s);

/// Fixed-point percentage, e.g. 0.42857 -> "42.86".
std::string format_percent(double fraction, int decimals = 2);

/// Compresses sorted indices into "0-4,7,9-12".
std::string format_ranges(std::span<const std::size_t> sorted);
std::vector<std::size_t> parse_ranges(std::string_view s);

std::string join(std::span<const std::string> parts, std::string_view sep);

}  // namespace a2c::text
