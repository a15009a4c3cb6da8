#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <sys/types.h>
#include <vector>

/// POSIX process helpers for encoder and detector subprocesses. No shell is
/// involved; commands are tokenized here and exec'd directly.
namespace degrade::process {

/// Splits a command line into argv. Supports single quotes, double quotes and
/// backslash escapes; performs no expansion. Throws on unbalanced quotes.
std::vector<std::string> split_command(std::string_view command);

/// Joins argv back into a string that split_command parses to the same argv.
std::string join_command(const std::vector<std::string>& argv);

struct RunResult {
	int exit_code = -1;
	int term_signal = 0;
	bool timed_out = false;
	/// Trailing portion of combined stdout and stderr.
	std::string output_tail;
	/// Full stdout when the caller asked for capture, otherwise empty.
	std::string stdout_text;

	bool ok() const noexcept { return !timed_out && term_signal == 0 && exit_code == 0; }
	std::string describe() const;
};

/// Runs argv to completion. On timeout the whole process group is killed.
RunResult run(const std::vector<std::string>& argv, std::chrono::milliseconds timeout, bool capture_stdout = false);

/// Long-lived child with line-oriented stdin/stdout pipes; stderr is inherited.
class Child {
public:
	Child() = default;
	explicit Child(const std::vector<std::string>& argv);
	~Child();

	Child(Child&& other) noexcept;
	Child& operator=(Child&& other) noexcept;
	Child(const Child&) = delete;
	Child& operator=(const Child&) = delete;

	bool running() const noexcept { return pid_ > 0; }
	pid_t pid() const noexcept { return pid_; }

	/// Appends '\n'. Returns false if the child closed its stdin.
	bool write_line(std::string_view line);

	/// Next line without its terminator. nullopt on timeout; throws
	/// degrade::Error on end of stream.
	std::optional<std::string> read_line(std::chrono::milliseconds timeout);

	/// Closes stdin, waits briefly, then kills.
	void terminate() noexcept;

private:
	pid_t pid_ = -1;
	int stdin_fd_ = -1;
	int stdout_fd_ = -1;
	std::string buffer_;
};

}  // namespace degrade::process
