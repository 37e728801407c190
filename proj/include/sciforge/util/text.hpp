#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sciforge::text {

constexpr bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::string_view trim_view(std::string_view s) noexcept;
std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Collapses every run of ASCII whitespace to a single space and trims the ends.
std::string collapse_whitespace(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string replace_all(std::string s, std::string_view from, std::string_view to);

// Parses the whole of `s` (after trimming) as a finite double.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Shortest decimal text that round-trips to `x`.
std::string shortest_repr(double x);

bool valid_utf8(std::string_view s) noexcept;

}  // namespace sciforge::text
