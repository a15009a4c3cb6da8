#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace degrade {

class Error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Malformed input text. `line` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
public:
	ParseError(std::size_t line, const std::string& what)
		: Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

	std::size_t line() const noexcept { return line_; }

private:
	std::size_t line_;
};

class ConfigError : public Error {
public:
	using Error::Error;
};

/// An encoder/decoder invocation failed. Per-candidate, never fatal to a sweep.
class AdapterError : public Error {
public:
	using Error::Error;
};

class DetectorError : public Error {
public:
	DetectorError(std::uint64_t request_id, const std::string& what)
		: Error("detector request " + std::to_string(request_id) + ": " + what), request_id_(request_id) {}

	std::uint64_t request_id() const noexcept { return request_id_; }

private:
	std::uint64_t request_id_;
};

class StoreError : public Error {
public:
	using Error::Error;
};

}  // namespace degrade
