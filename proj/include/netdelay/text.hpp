#pragma once

#include "netdelay/error.hpp"

#include <charconv>
#include <filesystem>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace netdelay {

std::vector<std::string> split_whitespace(std::string_view line);
std::vector<std::string_view> split_char(std::string_view line, char sep);
std::string_view trim(std::string_view s);

/// Shortest round-trip representation; may use exponent notation.
std::string format_double(double v);
/// Shortest round-trip representation in positional notation.
std::string format_fixed(double v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

template <class T>
T parse_number(std::string_view token, const std::string& context) {
    token = trim(token);
    T value{};
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || token.empty())
        fail(ErrorCode::Parse, context + "invalid number '" + std::string(token) + "'");
    return value;
}

} // namespace netdelay
