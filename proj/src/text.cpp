#include "degrade/text.hpp"

#include "degrade/error.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>
#include <unistd.h>

namespace degrade::text {

std::vector<std::string_view> split_lines(std::string_view text) {
	std::vector<std::string_view> lines;
	std::size_t start = 0;
	while (start < text.size()) {
		auto end = text.find('\n', start);
		if (end == std::string_view::npos)
			end = text.size();
		auto line = text.substr(start, end - start);
		if (!line.empty() && line.back() == '\r')
			line.remove_suffix(1);
		lines.push_back(line);
		start = end + 1;
	}
	return lines;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
	std::vector<std::string_view> out;
	std::size_t i = 0;
	auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; };
	while (i < line.size()) {
		while (i < line.size() && is_space(line[i]))
			++i;
		auto start = i;
		while (i < line.size() && !is_space(line[i]))
			++i;
		if (i > start)
			out.push_back(line.substr(start, i - start));
	}
	return out;
}

std::string_view trim(std::string_view s) {
	auto first = s.find_first_not_of(" \t\r\n");
	if (first == std::string_view::npos)
		return {};
	auto last = s.find_last_not_of(" \t\r\n");
	return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view token) {
	if (!token.empty() && token.front() == '+')
		token.remove_prefix(1);
	double value = 0.0;
	auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
	if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(value))
		return std::nullopt;
	return value;
}

std::optional<int> parse_int(std::string_view token) {
	if (!token.empty() && token.front() == '+')
		token.remove_prefix(1);
	int value = 0;
	auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
	if (ec != std::errc{} || ptr != token.data() + token.size())
		return std::nullopt;
	return value;
}

std::string format_double(double value) {
	char buf[64];
	auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
	return std::string(buf, ptr);
}

std::string format_fixed(double value, int decimals) {
	char buf[64];
	auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, decimals);
	return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw Error("cannot open " + path.string());
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
	auto tmp = path;
	tmp += ".tmp" + std::to_string(::getpid()) + "-" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
	{
		std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
		if (!out)
			throw Error("cannot write " + tmp.string());
		out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
		if (!out.flush())
			throw Error("write failed for " + tmp.string());
	}
	std::filesystem::rename(tmp, path);
}

}  // namespace degrade::text
