#pragma once

// Internal text helpers shared by the loaders.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tagseek::text {

void split_whitespace(std::string_view line, std::vector<std::string_view>& out);
std::optional<double> parse_double(std::string_view s);
/// Shortest decimal that round-trips.
std::string format_double(double x);

/// Invalid UTF-8 bytes decode to U+FFFD.
template <typename Fn>
void for_each_code_point(std::string_view s, Fn&& fn);

bool is_alpha(char32_t cp);
char32_t to_lower(char32_t cp);
void append_utf8(std::string& out, char32_t cp);
std::string fold_case(std::string_view s);

char32_t decode_one(std::string_view s, std::size_t& pos);

template <typename Fn>
void for_each_code_point(std::string_view s, Fn&& fn) {
    std::size_t pos = 0;
    while (pos < s.size()) fn(decode_one(s, pos));
}

} // namespace tagseek::text
