#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

/// Small text and file helpers shared by the parsers and writers.
namespace degrade::text {

/// Splits on '\n', stripping a trailing '\r'. A final newline does not yield
/// an extra empty line.
std::vector<std::string_view> split_lines(std::string_view text);
std::vector<std::string_view> split_whitespace(std::string_view line);
std::string_view trim(std::string_view s);

/// Whole-token parses; trailing garbage yields nullopt.
std::optional<double> parse_double(std::string_view token);
std::optional<int> parse_int(std::string_view token);

/// Shortest representation that round-trips through parse_double.
std::string format_double(double value);
/// Fixed-point with `decimals` digits.
std::string format_fixed(double value, int decimals);

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace degrade::text
